//! Shared helpers: fixture paths and a chat-completion mock served from its
//! own thread, so callers may start their own async runtimes.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_chunkorder")
}

/// `(status, reply text, delay)` for one request, given the target sentence
/// and the attempt number for that sentence.
pub type Reply = (StatusCode, String, Duration);
type Behaviour = dyn Fn(&str, usize) -> Reply + Send + Sync;

pub struct Mock {
    behaviour: Box<Behaviour>,
    in_flight: AtomicUsize,
    pub peak: AtomicUsize,
    calls: Mutex<HashMap<String, usize>>,
    pub requests: AtomicUsize,
}

pub fn ok(reply: impl Into<String>, ms: u64) -> Reply {
    (StatusCode::OK, reply.into(), Duration::from_millis(ms))
}

async fn chat(State(mock): State<Arc<Mock>>, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    let prompt = body["messages"][0]["content"].as_str().unwrap_or_default();
    let target = prompt
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix("Input: "))
        .unwrap_or_default()
        .to_string();
    let attempt = {
        let mut calls = mock.calls.lock().unwrap();
        let n = calls.entry(target.clone()).or_default();
        *n += 1;
        *n
    };
    mock.requests.fetch_add(1, Ordering::SeqCst);
    let now = mock.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    mock.peak.fetch_max(now, Ordering::SeqCst);
    let (status, reply, delay) = (mock.behaviour)(&target, attempt);
    tokio::time::sleep(delay).await;
    mock.in_flight.fetch_sub(1, Ordering::SeqCst);
    let body = json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": reply}}]});
    (status, Json(body))
}

/// Starts the mock and returns its endpoint URL. The server lives until the
/// process exits.
pub fn serve<F>(behaviour: F) -> (String, Arc<Mock>)
where
    F: Fn(&str, usize) -> Reply + Send + Sync + 'static,
{
    let mock = Arc::new(Mock {
        behaviour: Box::new(behaviour),
        in_flight: AtomicUsize::new(0),
        peak: AtomicUsize::new(0),
        calls: Mutex::new(HashMap::new()),
        requests: AtomicUsize::new(0),
    });
    let app = Router::new().route("/v1/chat/completions", post(chat)).with_state(mock.clone());
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    let addr = rx.recv().unwrap();
    (format!("http://{addr}/v1/chat/completions"), mock)
}

/// A config pointing the annotator at `url`, written into `dir`.
pub fn annotation_config(dir: &std::path::Path, url: &str, max_parallel: usize, retry_limit: u32) -> PathBuf {
    let text = format!(
        r#"[[corpora]]
name = "raw"
path = "raw.txt"
language = "english"

[annotation]
endpoint_url = "{url}"
model_name = "mock-model"
few_shot_path = "{}"
max_parallel = {max_parallel}
retry_limit = {retry_limit}
retry_backoff_ms = 0
timeout = 5
"#,
        fixture("few_shot.json").display()
    );
    let path = dir.join("chunkorder.toml");
    std::fs::write(&path, text).unwrap();
    path
}
