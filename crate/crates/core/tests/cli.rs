mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use basin_copilot::gateway::{router, Config, Engine};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::FIXED_CLOCK;

const BIN: &str = env!("CARGO_BIN_EXE_basin-copilot");

fn run(cwd: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(cwd).args(args).output().expect("spawn cli")
}

fn ok(cwd: &Path, args: &[&str]) -> String {
    let out = run(cwd, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// Generates fixtures and builds the index through the CLI.
fn prepared() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["fixtures", "gen", "--out", "."]);
    ok(dir.path(), &["index", "build", "--manifest", "corpus/corpus.json", "--out", "index.bcvx"]);
    dir
}

#[test]
fn fixture_generation_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(a.path(), &["fixtures", "gen", "--seed", "42", "--out", "."]);
    ok(b.path(), &["fixtures", "gen", "--out", "."]);
    let fa = files(a.path());
    assert!(fa.len() > 20);
    assert_eq!(fa, files(b.path()));
    let c = tempfile::tempdir().unwrap();
    ok(c.path(), &["fixtures", "gen", "--seed", "43", "--out", "."]);
    assert_ne!(fa, files(c.path()));
}

#[test]
fn index_build_reports_manifest_counts() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["fixtures", "gen", "--out", "."]);
    let out = ok(dir.path(), &["index", "build", "--manifest", "corpus/corpus.json", "--out", "index.bcvx"]);
    let manifest: Vec<Value> = serde_json::from_slice(&std::fs::read(dir.path().join("corpus/corpus.json")).unwrap()).unwrap();
    assert!(out.contains(&format!("documents: {}\n", manifest.len())), "{out}");
    assert!(out.contains("dimension: 256\n") && out.contains("embed_model_id: mock-fnv1a-256\n"), "{out}");
    let chunks: usize = out.lines().find_map(|l| l.strip_prefix("chunks: ")).unwrap().parse().unwrap();
    let index = basin_copilot::index::VectorIndex::load(&dir.path().join("index.bcvx")).unwrap();
    assert_eq!(index.len(), chunks);
    assert!(chunks >= manifest.len());
}

#[test]
fn ask_json_matches_http_answer() {
    let dir = prepared();
    let args = [
        "ask", "--config", "config.scripted.toml", "--session-id", "parity", "--fixed-clock", FIXED_CLOCK, "--json", "How much rain fell at R01 in 2024?",
    ];
    let cli = ok(dir.path(), &args);
    let cli = cli.trim_end();
    assert!(dir.path().join("chart_spec.json").exists());

    // Same script, session id and clock through the HTTP router, in a fresh
    // copy of the fixtures so session storage does not collide.
    let other = prepared();
    let mut cfg = Config::load(&other.path().join("config.scripted.toml")).unwrap();
    cfg.fixed_clock = Some(FIXED_CLOCK.into());
    let app = router(Arc::new(Engine::build(cfg).unwrap()));
    let http = tokio::runtime::Runtime::new().unwrap().block_on(async move {
        let post = |uri: &str, body: Value| {
            Request::builder().method("POST").uri(uri).header(header::CONTENT_TYPE, "application/json").body(Body::from(body.to_string())).unwrap()
        };
        let r = app.clone().oneshot(post("/sessions", json!({"session_id": "parity"}))).await.unwrap();
        assert_eq!(r.status(), StatusCode::CREATED);
        let r = app.oneshot(post("/sessions/parity/messages", json!({"text": "How much rain fell at R01 in 2024?"}))).await.unwrap();
        assert_eq!(r.status(), StatusCode::OK);
        r.into_body().collect().await.unwrap().to_bytes().to_vec()
    });
    assert_eq!(cli, String::from_utf8(http).unwrap());
    let v: Value = serde_json::from_str(cli).unwrap();
    assert!(!v["refs"].as_array().unwrap().is_empty());
    assert!(v["chart_spec"].is_object());
}

#[test]
fn ask_text_lists_references() {
    let dir = prepared();
    let out = ok(dir.path(), &["ask", "--index", "index.bcvx", "--data", "dataset.json", "--script", "script.json", "--chart-out", "c.json", "Rain at R01?"]);
    assert!(out.contains("References:\n[1] "), "{out}");
    let chart: Value = serde_json::from_slice(&std::fs::read(dir.path().join("c.json")).unwrap()).unwrap();
    assert!(chart.is_object());
}

#[test]
fn eval_run_is_deterministic() {
    let dir = prepared();
    for out in ["e1", "e2"] {
        let text = ok(dir.path(), &["eval", "run", "--dataset", "eval/dataset.jsonl", "--out", out]);
        assert!(text.contains("30"), "{text}");
    }
    let (a, b) = (files(&dir.path().join("e1")), files(&dir.path().join("e2")));
    assert_eq!(a.iter().map(|f| f.0.to_str().unwrap()).collect::<Vec<_>>(), ["report.json", "samples.csv", "summary.txt"]);
    assert_eq!(a, b);
    ok(dir.path(), &["eval", "run", "--dataset", "eval/dataset.jsonl", "--out", "e3", "--sut", "agent", "--config", "config.toml"]);
    assert!(dir.path().join("e3/report.json").exists());
}

#[test]
fn failures_use_distinct_exit_codes() {
    let dir = prepared();
    let code = |args: &[&str]| run(dir.path(), args).status.code();
    // Usage errors come from the argument parser.
    assert_eq!(code(&["ask"]), Some(2));
    assert_eq!(code(&["index", "build", "--manifest", "missing.json", "--out", "x.bcvx"]), Some(3));
    assert_eq!(code(&["eval", "run", "--dataset", "missing.jsonl", "--out", "e"]), Some(3));
    assert_eq!(code(&["ask", "--index", "missing.bcvx", "q"]), Some(4));
    assert_eq!(code(&["serve", "--config", "missing.toml"]), Some(4));
    std::fs::write(dir.path().join("bad.json"), "[]").unwrap();
    let out = run(dir.path(), &["ask", "--index", "index.bcvx", "--script", "bad.json", "q"]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
}
