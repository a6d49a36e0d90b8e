use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::engine::{Engine, EngineError};
use crate::agent::ExportError;

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub detail: Value,
}

pub struct ApiError {
    status: StatusCode,
    body: Box<ErrorBody>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>, detail: Value) -> Self {
        Self { status, body: Box::new(ErrorBody { code: code.into(), message: message.into(), detail }) }
    }
}

fn status_of(e: &EngineError) -> StatusCode {
    match e {
        EngineError::SessionNotFound(_) => StatusCode::NOT_FOUND,
        EngineError::EmptyMessage | EngineError::UnknownOption(_) | EngineError::BadSession(_) | EngineError::Eval(_) => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
        EngineError::Export(ExportError::UnknownFormat(_)) => StatusCode::UNPROCESSABLE_ENTITY,
        EngineError::Export(_) => StatusCode::CONFLICT,
        EngineError::Provider(_) => StatusCode::BAD_GATEWAY,
        EngineError::EvalDisabled => StatusCode::FORBIDDEN,
        EngineError::Unauthorized => StatusCode::UNAUTHORIZED,
        EngineError::Store(_) | EngineError::Index(_) | EngineError::Dataset(_) | EngineError::Startup(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let detail = match &e {
            EngineError::SessionNotFound(id) => json!({ "session_id": id }),
            EngineError::UnknownOption(o) => json!({ "option": o, "allowed": super::STARTER_OPTIONS.iter().map(|x| x.id.as_str()).collect::<Vec<_>>() }),
            _ => Value::Null,
        };
        ApiError::new(status_of(&e), e.code(), e.to_string(), detail)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(*self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Engine calls block (providers may do HTTP), so they run off the async workers.
async fn blocking<T, F>(engine: &Arc<Engine>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Engine) -> Result<T, EngineError> + Send + 'static,
{
    let engine = engine.clone();
    match tokio::task::spawn_blocking(move || f(&engine)).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", format!("request task failed: {e}"), Value::Null)),
    }
}

fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", e.to_string(), Value::Null))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    #[serde(default)]
    session_id: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PostMessage {
    #[serde(default)]
    text: String,
    #[serde(default)]
    option: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalRun {
    #[serde(default)]
    dataset_path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct ExportQuery {
    #[serde(default = "default_format")]
    format: String,
}

fn default_format() -> String {
    "markdown".into()
}

async fn create_session(State(engine): State<Arc<Engine>>, body: Bytes) -> ApiResult<(StatusCode, Response)> {
    let req: CreateSession = parse_body(&body)?;
    let info = blocking(&engine, move |e| e.create_session(req.session_id.as_deref())).await?;
    Ok((StatusCode::CREATED, Json(info).into_response()))
}

async fn options(State(engine): State<Arc<Engine>>) -> Response {
    Json(engine.options()).into_response()
}

async fn post_message(State(engine): State<Arc<Engine>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: PostMessage = parse_body(&body)?;
    let answer = blocking(&engine, move |e| e.send_message(&id, &req.text, req.option.as_deref())).await?;
    Ok(Json(answer).into_response())
}

async fn transcript(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult<Response> {
    let t = blocking(&engine, move |e| e.transcript(&id)).await?;
    Ok(Json(t).into_response())
}

async fn tools(State(engine): State<Arc<Engine>>) -> Response {
    Json(engine.tools()).into_response()
}

async fn export(State(engine): State<Arc<Engine>>, Path(id): Path<String>, Query(q): Query<ExportQuery>) -> ApiResult<Response> {
    let (format, bytes) = blocking(&engine, move |e| e.export(&id, &q.format)).await?;
    let disposition = format!("attachment; filename=\"answer.{}\"", format.extension());
    Ok(([(header::CONTENT_TYPE, format.content_type().to_owned()), (header::CONTENT_DISPOSITION, disposition)], bytes).into_response())
}

fn bearer(headers: &HeaderMap) -> Option<String> {
    let v = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    v.strip_prefix("Bearer ").map(|t| t.trim().to_owned())
}

async fn eval_run(State(engine): State<Arc<Engine>>, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let token = bearer(&headers);
    engine.check_eval_token(token.as_deref()).map_err(ApiError::from)?;
    let req: EvalRun = parse_body(&body)?;
    let path = req
        .dataset_path
        .ok_or_else(|| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", "dataset_path is required", Value::Null))?;
    let report = blocking(&engine, move |e| e.run_eval(token.as_deref(), &path)).await?;
    Ok(Json(report).into_response())
}

async fn healthz(State(engine): State<Arc<Engine>>) -> Response {
    Json(engine.health()).into_response()
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint", Value::Null)
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/options", get(options))
        .route("/sessions/{id}/messages", post(post_message))
        .route("/sessions/{id}/transcript", get(transcript))
        .route("/sessions/{id}/export", get(export))
        .route("/tools", get(tools))
        .route("/eval/run", post(eval_run))
        .route("/healthz", get(healthz))
        .fallback(fallback)
        .with_state(engine)
}

/// Serves until `shutdown` resolves, then stops accepting and lets
/// in-flight requests finish.
pub async fn serve(engine: Arc<Engine>, listener: tokio::net::TcpListener, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    axum::serve(listener, router(engine)).with_graceful_shutdown(shutdown).await
}

/// Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
