//! End-to-end behaviour of the `chunkorder` binary and the report bundle.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use axum::http::StatusCode;
use chunkorder_cli::report::{build_bundle, MANIFEST, TIMESTAMP_KEY};
use chunkorder_cli::{run, PipelineConfig};
use common::{annotation_config, bin, fixture, ok, serve};
use serde_json::Value;

fn chunkorder(args: &[&str]) -> Output {
    Command::new(bin()).args(args).env_remove("CHUNKORDER_API_KEY").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn without_timestamp(manifest: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(manifest).unwrap();
    v.as_object_mut().unwrap().remove(TIMESTAMP_KEY).expect("timestamp present");
    v
}

fn fixture_config() -> PipelineConfig {
    PipelineConfig::load(&fixture("chunkorder.toml")).unwrap()
}

#[test]
fn report_matches_golden_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let o = chunkorder(&["report", "--config", fixture("chunkorder.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let golden_dir = fixture("expected_bundle");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        let _ = fs::remove_dir_all(&golden_dir);
        fs::rename(&out, &golden_dir).unwrap();
        return;
    }
    let got = read_tree(&out);
    let want = read_tree(&golden_dir);
    assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
    for (name, bytes) in &want {
        if name == MANIFEST {
            assert_eq!(without_timestamp(&got[name]), without_timestamp(bytes));
        } else {
            assert!(got[name] == *bytes, "{name} differs from the golden copy");
        }
    }
}

#[test]
fn golden_tables_agree_with_oracle_counts() {
    for name in ["mini_en", "mini_zh"] {
        let exp: Value = serde_json::from_str(&fs::read_to_string(fixture(&format!("{name}.expected.json"))).unwrap()).unwrap();
        let csv = fs::read_to_string(fixture(&format!("expected_bundle/{name}/fc_distribution.csv"))).unwrap();
        for line in csv.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(
                cols[1].parse::<u64>().unwrap(),
                exp["fc_distribution"][cols[0]]["frequency"].as_u64().unwrap(),
                "{name} {line}"
            );
        }
        let condprob = fs::read_to_string(fixture(&format!("expected_bundle/{name}/condprob.csv"))).unwrap();
        for row in exp["condprob"].as_array().unwrap() {
            let key = format!("{},{},", row["fc"].as_str().unwrap(), row["anchor"].as_str().unwrap());
            let line = condprob.lines().find(|l| l.starts_with(&key)).unwrap();
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[4].parse::<u64>().unwrap(), row["n"].as_u64().unwrap(), "{name} {line}");
        }
    }
}

#[test]
fn bundle_is_deterministic_and_complete() {
    let cfg = fixture_config();
    let a = build_bundle(&cfg, "t0").unwrap();
    let b = build_bundle(&cfg, "t1").unwrap();
    assert_eq!(a.files.len(), b.files.len());
    for (name, bytes) in &a.files {
        if name != MANIFEST {
            assert_eq!(bytes, &b.files[name], "{name}");
        }
    }
    let tables = [
        "stats.json",
        "fc_distribution.csv",
        "positions.csv",
        "tests.csv",
        "condprob.csv",
        "patterns.csv",
        "combos.csv",
        "transitions.csv",
        "transition_matrix.csv",
        "transitions.svg",
    ];
    for corpus in ["mini_en", "mini_zh"] {
        for t in tables {
            assert!(a.files.contains_key(&format!("{corpus}/{t}")), "{corpus}/{t}");
        }
    }
    assert_eq!(a.files.len(), 2 * tables.len() + 5);
    let manifest: Value = serde_json::from_slice(&a.files[MANIFEST]).unwrap();
    for (name, digest) in manifest["files"].as_object().unwrap() {
        assert_eq!(digest.as_str().unwrap(), chunkorder_cli::report::sha256_hex(&a.files[name]));
    }
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn run_twice_into_same_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let cfg = fixture("chunkorder.toml");
    for _ in 0..2 {
        let o = chunkorder(&["report", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 1, "{leftovers:?}");
}

#[test]
fn refuses_to_replace_foreign_directory() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("notes.txt"), "keep me").unwrap();
    let o = chunkorder(&["report", "--config", fixture("chunkorder.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(fs::read_to_string(dir.path().join("notes.txt")).unwrap(), "keep me");
}

#[test]
fn empty_corpus_aborts_without_output() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.txt"), "\n\n").unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "output_dir = \"out\"\n[[corpora]]\nname = \"empty\"\npath = \"empty.txt\"\nlanguage = \"en\"\n",
    )
    .unwrap();
    let o = chunkorder(&["report", "--config", dir.path().join("c.toml").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("empty"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn nested_tag_corpus_is_rejected_in_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        format!(
            "[[corpora]]\nname = \"bad\"\npath = \"{}\"\nlanguage = \"en\"\n",
            fixture("bad_nested.txt").display()
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = chunkorder(&["report", "--config", dir.path().join("c.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&chunkorder(&[])), 1);
    assert_eq!(code(&chunkorder(&["frobnicate"])), 1);
    assert_eq!(code(&chunkorder(&["--help"])), 0);
    assert_eq!(code(&chunkorder(&["--version"])), 0);
    assert_eq!(code(&chunkorder(&["stats", "--in", "/nonexistent/corpus.txt"])), 2);
    assert_eq!(code(&chunkorder(&["stats", "--in", fixture("mini_en.txt").to_str().unwrap(), "--language", "klingon"])), 1);

    let o = chunkorder(&["validate", "--in", fixture("bad_nested.txt").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = chunkorder(&["validate", "--in", fixture("mini_en.txt").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("32 sentences, 152 chunks, 0 errors"), "{}", stdout(&o));
}

#[test]
fn validate_modes_differ_on_unknown_tags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    fs::write(&path, "<S>We</S> <V>met</V> <when>today</when>.\n").unwrap();
    let strict = chunkorder(&["validate", "--in", path.to_str().unwrap()]);
    assert_eq!(code(&strict), 2);
    let lenient = chunkorder(&["validate", "--in", path.to_str().unwrap(), "--lenient"]);
    assert_eq!(code(&lenient), 0, "{}", stderr(&lenient));
    assert!(stderr(&lenient).contains("warning"));
}

#[test]
fn api_key_in_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = annotation_config(dir.path(), "http://127.0.0.1:9/", 1, 0);
    let mut text = fs::read_to_string(&cfg).unwrap();
    text.push_str("api_key = \"sk-secret\"\n");
    fs::write(&cfg, text).unwrap();
    let o = chunkorder(&["stats", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("api_key"), "{}", stderr(&o));
}

#[test]
fn single_table_commands() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let en = fixture("mini_en.txt");
    let code = run(["chunkorder", "positions", "--in", en.to_str().unwrap(), "--name", "en"], &mut out, &mut err);
    assert_eq!(code, 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("corpus,label,sentence_id,rel_pos\n"));
    assert_eq!(text.lines().count(), 1 + 67);
    assert!(text.lines().skip(1).all(|l| l.starts_with("en,")));

    let cfg = fixture("chunkorder.toml");
    let cases: [(&[&str], &str); 6] = [
        (&["tests", "--cross"], "cross_tests.csv"),
        (&["condprob"], "mini_en/condprob.csv"),
        (&["transitions", "--matrix"], "mini_en/transition_matrix.csv"),
        (&["patterns"], "mini_en/patterns.csv"),
        (&["combos"], "mini_en/combos.csv"),
        (&["stats", "--fc"], "mini_en/fc_distribution.csv"),
    ];
    for (args, golden) in cases {
        let mut out = Vec::new();
        let mut full = vec!["chunkorder"];
        full.extend_from_slice(args);
        full.extend(["--config", cfg.to_str().unwrap()]);
        assert_eq!(run(full, &mut out, &mut Vec::new()), 0, "{args:?}");
        let text = String::from_utf8(out).unwrap();
        let want = fs::read_to_string(fixture(&format!("expected_bundle/{golden}"))).unwrap();
        if golden.contains('/') {
            let body: Vec<String> = text
                .lines()
                .skip(1)
                .filter_map(|l| l.strip_prefix("mini_en,").map(String::from))
                .collect();
            assert_eq!(body, want.lines().skip(1).map(String::from).collect::<Vec<_>>(), "{args:?}");
        } else {
            assert_eq!(text, want);
        }
    }
}

#[test]
fn semantics_command() {
    let dir = tempfile::tempdir().unwrap();
    let proj = dir.path().join("p.csv");
    let mut out = Vec::new();
    let emb = fixture("emb_mini.jsonl");
    let code = run(
        ["chunkorder", "semantics", "--embeddings", emb.to_str().unwrap(), "--subset", "en", "--subset", "zh", "--projection", proj.to_str().unwrap()],
        &mut out,
        &mut Vec::new(),
    );
    assert_eq!(code, 0);
    assert_eq!(String::from_utf8(out).unwrap(), "subset_a,subset_b,n_a,n_b,cosine_pct\nen,zh,10,10,-67.41\n");
    assert_eq!(fs::read(&proj).unwrap(), fs::read(fixture("expected_bundle/projection.csv")).unwrap());
}

#[test]
fn parse_tagged_output_round_trips() {
    let o = chunkorder(&["parse", "--in", fixture("mini_zh.txt").to_str().unwrap(), "--tagged", "--language", "zh"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 30);
    let dir = tempfile::tempdir().unwrap();
    let again = dir.path().join("again.txt");
    fs::write(&again, &text).unwrap();
    let o2 = chunkorder(&["parse", "--in", again.to_str().unwrap(), "--tagged", "--language", "zh"]);
    assert_eq!(stdout(&o2), text);
}

#[test]
fn annotate_without_key_is_service_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = annotation_config(dir.path(), "http://127.0.0.1:9/v1/chat/completions", 1, 0);
    let out = dir.path().join("out.txt");
    let o = chunkorder(&["annotate", "--in", fixture("raw_en.txt").to_str().unwrap(), "--out", out.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("CHUNKORDER_API_KEY"), "{}", stderr(&o));
}

#[test]
fn annotate_dual_run_against_mock() {
    let (url, _) = serve(|target, _| ok(format!("<S>{target}</S>"), 5));
    let dir = tempfile::tempdir().unwrap();
    let cfg = annotation_config(dir.path(), &url, 2, 0);
    let out = dir.path().join("tagged.txt");
    let report = dir.path().join("agreement.json");
    let o = Command::new(bin())
        .args(["annotate", "--in", fixture("raw_en.txt").to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(["--config", cfg.to_str().unwrap(), "--dual", "--agreement-out", report.to_str().unwrap()])
        .env("CHUNKORDER_API_KEY", "test-key")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tagged = fs::read_to_string(&out).unwrap();
    assert_eq!(tagged.lines().count(), 3);
    assert!(tagged.starts_with("raw_en-L1\t<S>Neal will assume"));
    assert_eq!(fs::read_to_string(format!("{}.run2", out.display())).unwrap(), tagged);
    let agreement: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(agreement["exact_match_rate"], 1.0);
    assert_eq!(agreement["chunk_f1"], 1.0);
}

#[test]
fn annotate_failure_exits_three_and_keeps_good_lines() {
    let (url, _) = serve(|target, _| {
        if target.starts_with("Cuyjet") {
            (StatusCode::INTERNAL_SERVER_ERROR, String::new(), std::time::Duration::ZERO)
        } else {
            ok(format!("<S>{target}</S>"), 0)
        }
    });
    let dir = tempfile::tempdir().unwrap();
    let cfg = annotation_config(dir.path(), &url, 2, 1);
    let out = dir.path().join("tagged.txt");
    let o = Command::new(bin())
        .args(["annotate", "--in", fixture("raw_en.txt").to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(["--config", cfg.to_str().unwrap()])
        .env("CHUNKORDER_API_KEY", "test-key")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let tagged = fs::read_to_string(&out).unwrap();
    assert_eq!(tagged.lines().map(|l| l.split('\t').next().unwrap()).collect::<Vec<_>>(), ["raw_en-L1", "raw_en-L3"]);
}
