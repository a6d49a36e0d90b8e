mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use basin_copilot::gateway::{router, serve, Engine};
use basin_copilot::provider::{ChatResponse, RuleChat, ScriptedChat};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::Workspace;

struct Reply {
    status: StatusCode,
    headers: axum::http::HeaderMap,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("not json ({e}): {}", String::from_utf8_lossy(&self.body)))
    }

    /// Non-2xx replies carry {code, message, detail}.
    fn error_code(&self) -> String {
        assert!(!self.status.is_success());
        let v = self.json();
        assert!(v["message"].is_string() && v.get("detail").is_some(), "{v}");
        v["code"].as_str().unwrap().to_owned()
    }
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>, auth: Option<&str>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = auth {
        req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, headers, body }
}

fn scripted(script: Value) -> Arc<ScriptedChat> {
    let script: Vec<ChatResponse> = serde_json::from_value(script).unwrap();
    Arc::new(ScriptedChat::new(script))
}

fn app(ws: &Workspace, script: Value, token: Option<&str>) -> Router {
    router(Arc::new(ws.engine(scripted(script), token)))
}

fn rainfall_script() -> Value {
    json!([
        {"kind": "tool_calls", "tool_calls": [{"name": "search_documents", "arguments": {"query": "rainfall Limpopo", "k": 2}}]},
        {"kind": "tool_calls", "tool_calls": [{"name": "chart_spec", "arguments": {"tool": "monthly_rainfall", "params": {"station_id": "R01", "year": 2024}, "chart_kind": "grouped_bar"}}]},
        {"kind": "final_text", "text": "Monthly rainfall at R01 for 2024 is tabulated and charted."}
    ])
}

async fn new_session(app: &Router) -> String {
    let r = send(app, "POST", "/sessions", None, None).await;
    assert_eq!(r.status, StatusCode::CREATED);
    r.json()["session_id"].as_str().unwrap().to_owned()
}

#[tokio::test]
async fn discovery_endpoints() {
    let ws = Workspace::new(42);
    let app = app(&ws, json!([]), None);

    let r = send(&app, "GET", "/options", None, None).await;
    assert_eq!(r.status, StatusCode::OK);
    let ids: Vec<String> = r.json().as_array().unwrap().iter().map(|o| o["id"].as_str().unwrap().to_owned()).collect();
    assert_eq!(ids, ["limpopo_library", "realtime_analysis", "export_generate", "new_conversation"]);

    let r = send(&app, "GET", "/tools", None, None).await;
    let tools = r.json();
    assert_eq!(tools.as_array().unwrap().len(), 8);
    assert!(tools.as_array().unwrap().iter().all(|t| t["type"] == "function" && t["function"]["name"].is_string() && t["function"]["parameters"]["type"] == "object"));

    let r = send(&app, "GET", "/healthz", None, None).await;
    let h = r.json();
    assert_eq!(h["status"], "ok");
    assert_eq!(h["tools"], 8);
    assert_eq!(h["index"]["embed_model_id"], "mock-fnv1a-256");
    assert!(h["index"]["entries"].as_u64().unwrap() > 20);
    assert_eq!(h["dataset"]["dataset_id"], "synthetic-basin");

    let r = send(&app, "GET", "/nope", None, None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.error_code(), "not_found");
}

#[tokio::test]
async fn message_returns_answer_with_refs_and_chart() {
    let ws = Workspace::new(42);
    let app = app(&ws, rainfall_script(), None);
    let id = new_session(&app).await;
    let r = send(&app, "POST", &format!("/sessions/{id}/messages"), Some(json!({"text": "Rainfall at R01 in 2024?"})), None).await;
    assert_eq!(r.status, StatusCode::OK);
    let a = r.json();
    assert_eq!(a["session_id"], id.as_str());
    assert_eq!(a["status"], "complete");
    assert_eq!(a["refs"].as_array().unwrap().len(), 3);
    assert_eq!(a["chart_spec"]["kind"], "grouped_bar");
    assert_eq!(a["chart_spec"]["series"].as_array().unwrap().len(), 4);
    assert_eq!(a["table"]["rows"].as_array().unwrap().len(), 12);

    let t = send(&app, "GET", &format!("/sessions/{id}/transcript"), None, None).await.json();
    assert_eq!(t["session_id"], id.as_str());
    let roles: Vec<&str> = t["turns"].as_array().unwrap().iter().map(|t| t["role"].as_str().unwrap()).collect();
    assert_eq!(roles, ["user", "assistant", "tool", "assistant", "tool", "assistant"]);
}

#[tokio::test]
async fn message_errors() {
    let ws = Workspace::new(42);
    let app = app(&ws, rainfall_script(), None);
    let r = send(&app, "POST", "/sessions/missing/messages", Some(json!({"text": "hi"})), None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.error_code(), "session_not_found");
    assert_eq!(r.json()["detail"]["session_id"], "missing");

    let id = new_session(&app).await;
    let uri = format!("/sessions/{id}/messages");
    let r = send(&app, "POST", &uri, Some(json!({"text": "   "})), None).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.error_code(), "empty_message");

    let r = send(&app, "POST", &uri, Some(json!({"text": "hi", "option": "weather"})), None).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.error_code(), "unknown_option");

    let r = send(&app, "POST", &uri, Some(json!({"txt": "hi"})), None).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.error_code(), "invalid_body");

    // Nothing above reached the provider or the transcript.
    let t = send(&app, "GET", &format!("/sessions/{id}/transcript"), None, None).await.json();
    assert!(t["turns"].as_array().unwrap().is_empty());

    let r = send(&app, "GET", "/sessions/missing/transcript", None, None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn provider_failure_is_bad_gateway() {
    let ws = Workspace::new(42);
    let app = app(&ws, json!([]), None);
    let id = new_session(&app).await;
    let r = send(&app, "POST", &format!("/sessions/{id}/messages"), Some(json!({"text": "hi"})), None).await;
    assert_eq!(r.status, StatusCode::BAD_GATEWAY);
    assert_eq!(r.error_code(), "provider_failure");
}

#[tokio::test]
async fn explicit_session_ids() {
    let ws = Workspace::new(42);
    let app = app(&ws, json!([]), None);
    let r = send(&app, "POST", "/sessions", Some(json!({"session_id": "demo-1"})), None).await;
    assert_eq!(r.status, StatusCode::CREATED);
    assert_eq!(r.json()["created_at"], common::FIXED_CLOCK);
    let r = send(&app, "POST", "/sessions", Some(json!({"session_id": "demo-1"})), None).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let r = send(&app, "POST", "/sessions", Some(json!({"session_id": "../etc"})), None).await;
    assert_eq!(r.error_code(), "invalid_session");
}

#[tokio::test]
async fn option_hint_is_recorded() {
    let ws = Workspace::new(42);
    let app = app(&ws, json!([{"kind": "final_text", "text": "Which station and year?"}]), None);
    let id = new_session(&app).await;
    let r = send(&app, "POST", &format!("/sessions/{id}/messages"), Some(json!({"text": "rainfall please", "option": "realtime_analysis"})), None).await;
    assert_eq!(r.status, StatusCode::OK);
    let t = send(&app, "GET", &format!("/sessions/{id}/transcript"), None, None).await.json();
    let turns = t["turns"].as_array().unwrap();
    assert_eq!(turns[0]["role"], "system");
    assert!(turns[0]["content"]["text"].as_str().unwrap().contains("monitoring data"));
    assert_eq!(turns[1]["role"], "user");
}

#[tokio::test]
async fn exports() {
    let ws = Workspace::new(42);
    let app = app(&ws, rainfall_script(), None);
    let id = new_session(&app).await;

    let r = send(&app, "GET", &format!("/sessions/{id}/export?format=markdown"), None, None).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.error_code(), "nothing_to_export");

    send(&app, "POST", &format!("/sessions/{id}/messages"), Some(json!({"text": "Rainfall at R01?"})), None).await;

    let r = send(&app, "GET", &format!("/sessions/{id}/export"), None, None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert!(r.headers[header::CONTENT_TYPE].to_str().unwrap().starts_with("text/markdown"));
    assert!(r.headers[header::CONTENT_DISPOSITION].to_str().unwrap().contains("answer.md"));
    let md = String::from_utf8(r.body.clone()).unwrap();
    assert!(md.contains("## References") && md.contains("[3]"));
    assert!(md.contains("| Month |"));

    let r = send(&app, "GET", &format!("/sessions/{id}/export?format=csv"), None, None).await;
    assert_eq!(r.status, StatusCode::OK);
    let csv = String::from_utf8(r.body.clone()).unwrap();
    assert!(csv.starts_with("Month,Min Rainfall (mm)"));
    assert_eq!(csv.lines().count(), 13);

    let r = send(&app, "GET", &format!("/sessions/{id}/export?format=json"), None, None).await;
    assert_eq!(r.json()["session_id"], id.as_str());

    let r = send(&app, "GET", &format!("/sessions/{id}/export?format=pdf"), None, None).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.error_code(), "unknown_format");
}

#[tokio::test]
async fn csv_export_without_table_conflicts() {
    let ws = Workspace::new(42);
    let app = app(
        &ws,
        json!([
            {"kind": "tool_calls", "tool_calls": [{"name": "list_eflow_sites", "arguments": {"river": "Nile"}}]},
            {"kind": "final_text", "text": "That tool takes no river argument."}
        ]),
        None,
    );
    let id = new_session(&app).await;
    send(&app, "POST", &format!("/sessions/{id}/messages"), Some(json!({"text": "dams?"})), None).await;
    let r = send(&app, "GET", &format!("/sessions/{id}/export?format=csv"), None, None).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.error_code(), "no_tabular_result");
}

#[tokio::test]
async fn eval_endpoint_is_token_gated() {
    let ws = Workspace::new(42);
    let dataset = ws.file("eval/dataset.jsonl").display().to_string();

    let disabled = app(&ws, json!([]), None);
    let r = send(&disabled, "POST", "/eval/run", Some(json!({"dataset_path": dataset})), Some("x")).await;
    assert_eq!(r.status, StatusCode::FORBIDDEN);
    assert_eq!(r.error_code(), "eval_disabled");

    let engine = Arc::new(ws.engine(Arc::new(RuleChat), Some("s3cret")));
    let app = router(engine);
    let r = send(&app, "POST", "/eval/run", Some(json!({"dataset_path": dataset})), None).await;
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
    let r = send(&app, "POST", "/eval/run", Some(json!({"dataset_path": dataset})), Some("wrong")).await;
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
    let r = send(&app, "POST", "/eval/run", Some(json!({})), Some("s3cret")).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let r = send(&app, "POST", "/eval/run", Some(json!({"dataset_path": "/nonexistent.jsonl"})), Some("s3cret")).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);

    let r = send(&app, "POST", "/eval/run", Some(json!({"dataset_path": dataset})), Some("s3cret")).await;
    assert_eq!(r.status, StatusCode::OK);
    let report = r.json();
    assert_eq!(report["samples"].as_array().unwrap().len(), 30);
    assert!(report["ragas_score"].is_number() || report["ragas_score"].is_null());
}

#[tokio::test]
async fn concurrent_sessions() {
    let ws = Workspace::new(42);
    let app = router(Arc::new(ws.engine(Arc::new(RuleChat), None)));
    let mut ids = Vec::new();
    for _ in 0..8 {
        ids.push(new_session(&app).await);
    }
    let tasks: Vec<_> = ids
        .iter()
        .map(|id| {
            let app = app.clone();
            let uri = format!("/sessions/{id}/messages");
            tokio::spawn(async move { send(&app, "POST", &uri, Some(json!({"text": "groundwater recharge"})), None).await.status })
        })
        .collect();
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    for id in &ids {
        let t = send(&app, "GET", &format!("/sessions/{id}/transcript"), None, None).await.json();
        assert_eq!(t["turns"].as_array().unwrap().iter().filter(|t| t["role"] == "user").count(), 1);
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn graceful_shutdown_over_tcp() {
    let ws = Workspace::new(42);
    let engine: Arc<Engine> = Arc::new(ws.engine(Arc::new(RuleChat), None));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(serve(engine, listener, async {
        let _ = stop_rx.await;
    }));
    let base = format!("http://{addr}");
    let health = tokio::task::spawn_blocking(move || reqwest::blocking::get(format!("{base}/healthz")).unwrap().status().as_u16()).await.unwrap();
    assert_eq!(health, 200);
    stop_tx.send(()).unwrap();
    server.await.unwrap().unwrap();
}
