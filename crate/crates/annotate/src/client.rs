use std::time::Duration;

use chunkorder_core::corpus::split_id;
use chunkorder_core::{parse_sentence, Corpus, Language, Mode, Sentence};
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use crate::{build_prompt, AnnotateError, AnnotationConfig, FewShotSet, API_KEY_VAR};

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [Message<'a>; 1],
    temperature: f64,
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
}

#[derive(Deserialize)]
struct ReplyMessage {
    content: Option<String>,
}

/// One raw line that could not be annotated.
#[derive(Debug)]
pub struct LineFailure {
    /// 1-based line number in the input.
    pub line: usize,
    pub id: String,
    pub error: AnnotateError,
}

enum Failure {
    /// Worth another attempt; carries the message for the final error.
    Service(String),
    /// Not worth retrying (e.g. rejected credentials).
    Fatal(String),
    Malformed { reason: String, reply: String },
}

/// Chat-completion client bound to one config, few-shot set and API key.
#[derive(Debug, Clone)]
pub struct Annotator {
    cfg: AnnotationConfig,
    few_shot: FewShotSet,
    api_key: String,
    http: reqwest::Client,
}

impl Annotator {
    pub fn new(cfg: AnnotationConfig, few_shot: FewShotSet, api_key: Option<String>) -> Result<Self, AnnotateError> {
        let api_key = api_key.filter(|k| !k.trim().is_empty()).ok_or(AnnotateError::AuthMissing)?;
        cfg.validate()?;
        few_shot.validate()?;
        let http = reqwest::Client::builder()
            .timeout(cfg.timeout())
            .build()
            .map_err(|e| AnnotateError::InvalidConfig(e.to_string()))?;
        Ok(Annotator {
            cfg,
            few_shot,
            api_key,
            http,
        })
    }

    /// Reads the API key from `CHUNKORDER_API_KEY`.
    pub fn from_env(cfg: AnnotationConfig, few_shot: FewShotSet) -> Result<Self, AnnotateError> {
        Self::new(cfg, few_shot, std::env::var(API_KEY_VAR).ok())
    }

    pub fn config(&self) -> &AnnotationConfig {
        &self.cfg
    }

    async fn complete(&self, prompt: &str) -> Result<String, Failure> {
        let body = ChatRequest {
            model: &self.cfg.model_name,
            messages: [Message {
                role: "user",
                content: prompt,
            }],
            temperature: self.cfg.temperature,
        };
        let response = self
            .http
            .post(&self.cfg.endpoint_url)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .await
            .map_err(|e| Failure::Service(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().await.unwrap_or_default();
            let message = format!("HTTP {status}: {}", text.chars().take(200).collect::<String>());
            let retryable = status.is_server_error() || status.as_u16() == 408 || status.as_u16() == 429;
            return Err(if retryable {
                Failure::Service(message)
            } else {
                Failure::Fatal(message)
            });
        }
        let parsed: ChatResponse = response
            .json()
            .await
            .map_err(|e| Failure::Service(format!("unreadable response: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Failure::Service("response has no message content".into()))
    }

    /// Annotates one raw sentence.
    ///
    /// A reply that does not parse strictly is retried with the parse error
    /// appended to the prompt, up to `retry_limit` extra attempts.
    pub async fn annotate_sentence(&self, id: &str, raw: &str) -> Result<Sentence, AnnotateError> {
        let base = build_prompt(raw, &self.few_shot)?;
        let attempts = self.cfg.retry_limit + 1;
        let mut prompt = base.clone();
        let mut last = Failure::Service("no attempt made".into());
        for attempt in 1..=attempts {
            if attempt > 1 && matches!(last, Failure::Service(_)) {
                let delay = self.cfg.retry_backoff_ms * u64::from(attempt - 1);
                tokio::time::sleep(Duration::from_millis(delay)).await;
            }
            let reply = match self.complete(&prompt).await {
                Ok(reply) => reply,
                Err(Failure::Fatal(message)) => {
                    return Err(AnnotateError::ServiceError { attempts: attempt, message })
                }
                Err(failure) => {
                    last = failure;
                    continue;
                }
            };
            match check_reply(id, &reply) {
                Ok(sentence) => return Ok(sentence),
                Err(reason) => {
                    prompt = format!(
                        "{base}\n\nYour previous reply was rejected ({reason}):\n{}\nReply again with the corrected annotated sentence only.\nInput: {raw}\nOutput:",
                        reply.trim()
                    );
                    last = Failure::Malformed { reason, reply };
                }
            }
        }
        Err(match last {
            Failure::Malformed { reason, reply } => AnnotateError::MalformedAnnotation {
                attempts,
                reason,
                reply,
            },
            Failure::Service(message) | Failure::Fatal(message) => AnnotateError::ServiceError { attempts, message },
        })
    }

    /// Annotates every non-blank line with at most `max_parallel` requests in
    /// flight. Output keeps input order; lines that fail are reported by line
    /// number instead of aborting the run.
    ///
    /// Lines may carry an `id<TAB>` prefix; otherwise ids are `<name>-L<line>`.
    pub async fn annotate_corpus<S: AsRef<str>>(
        &self,
        raw_lines: &[S],
        name: &str,
        language: Language,
    ) -> Result<(Corpus, Vec<LineFailure>), AnnotateError> {
        let jobs: Vec<(usize, String, &str)> = raw_lines
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.as_ref().trim().is_empty())
            .map(|(i, l)| {
                let line = l.as_ref().trim_end_matches(['\n', '\r']);
                match split_id(line) {
                    Some((id, body)) => (i + 1, id.to_string(), body),
                    None => (i + 1, format!("{name}-L{}", i + 1), line),
                }
            })
            .collect();
        let results: Vec<_> = stream::iter(jobs)
            .map(|(line, id, raw)| async move {
                let result = self.annotate_sentence(&id, raw).await;
                (line, id, result)
            })
            .buffered(self.cfg.max_parallel)
            .collect()
            .await;

        let mut sentences = Vec::new();
        let mut failures = Vec::new();
        for (line, id, result) in results {
            match result {
                Ok(sentence) => sentences.push(sentence),
                Err(AnnotateError::AuthMissing) => return Err(AnnotateError::AuthMissing),
                Err(error) => failures.push(LineFailure { line, id, error }),
            }
        }
        Ok((Corpus::new(name, language, sentences)?, failures))
    }
}

/// Accepts a single-line reply (an echoed `Output:` prefix is dropped) that
/// parses strictly.
fn check_reply(id: &str, reply: &str) -> Result<Sentence, String> {
    let text = reply.trim();
    let text = text.strip_prefix("Output:").map_or(text, str::trim_start);
    if text.is_empty() {
        return Err("empty reply".into());
    }
    if text.contains('\n') {
        return Err("reply spans several lines".into());
    }
    parse_sentence(id, text, Mode::Strict)
        .map(|p| p.sentence)
        .map_err(|e| format!("{}: {} at byte {}", e.kind.name(), e.kind, e.offset))
}
