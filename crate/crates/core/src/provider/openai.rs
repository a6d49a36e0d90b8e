//! OpenAI-compatible chat-completions and embeddings over HTTP.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{ChatProvider, ChatRequest, ChatResponse, Embedder, ProviderError};
use crate::protocol::{ConversationTurn, Role, ToolCall, ToolResult, TurnContent};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireFunction {
    pub name: String,
    /// JSON-encoded argument object, as the protocol specifies.
    pub arguments: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireToolCall {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub function: WireFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireMessage {
    pub role: String,
    #[serde(default)]
    pub content: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_calls: Option<Vec<WireToolCall>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireChatRequest {
    pub model: String,
    pub messages: Vec<WireMessage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tools: Vec<Value>,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireChoice {
    pub index: u32,
    pub message: WireMessage,
    #[serde(default)]
    pub finish_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireChatResponse {
    pub choices: Vec<WireChoice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEmbeddingRequest {
    pub model: String,
    pub input: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEmbedding {
    pub index: usize,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEmbeddingResponse {
    pub data: Vec<WireEmbedding>,
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::System => "system",
        Role::User => "user",
        Role::Assistant => "assistant",
        Role::Tool => "tool",
    }
}

pub fn turn_to_wire(turn: &ConversationTurn) -> WireMessage {
    let mut msg = WireMessage {
        role: role_name(turn.role).into(),
        content: None,
        tool_calls: None,
        tool_call_id: None,
        name: None,
    };
    match &turn.content {
        TurnContent::Text { text } => msg.content = Some(text.clone()),
        TurnContent::ToolCalls { calls } => {
            msg.tool_calls = Some(
                calls
                    .iter()
                    .map(|c| WireToolCall {
                        id: c.call_id.clone(),
                        kind: "function".into(),
                        function: WireFunction {
                            name: c.name.clone(),
                            arguments: Value::Object(c.arguments.clone()).to_string(),
                        },
                    })
                    .collect(),
            )
        }
        TurnContent::ToolResult { call_id, name, result } => {
            msg.tool_call_id = Some(call_id.clone());
            msg.name = Some(name.clone());
            msg.content = Some(serde_json::to_string(result).unwrap_or_default());
        }
    }
    msg
}

fn parse_arguments(raw: &str) -> Result<Map<String, Value>, ProviderError> {
    if raw.trim().is_empty() {
        return Ok(Map::new());
    }
    match serde_json::from_str(raw) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(other) => Err(ProviderError::Malformed(format!("tool arguments are not an object: {other}"))),
        Err(e) => Err(ProviderError::Malformed(format!("tool arguments are not JSON: {e}"))),
    }
}

fn wire_calls(calls: &[WireToolCall]) -> Result<Vec<ToolCall>, ProviderError> {
    calls
        .iter()
        .map(|c| {
            Ok(ToolCall { call_id: c.id.clone(), name: c.function.name.clone(), arguments: parse_arguments(&c.function.arguments)? })
        })
        .collect()
}

pub fn wire_to_turn(msg: &WireMessage) -> Result<ConversationTurn, ProviderError> {
    let role = match msg.role.as_str() {
        "system" => Role::System,
        "user" => Role::User,
        "assistant" => Role::Assistant,
        "tool" => Role::Tool,
        other => return Err(ProviderError::Malformed(format!("unknown role `{other}`"))),
    };
    let content = if let Some(calls) = msg.tool_calls.as_ref().filter(|c| !c.is_empty()) {
        TurnContent::ToolCalls { calls: wire_calls(calls)? }
    } else if let Some(call_id) = &msg.tool_call_id {
        let raw = msg.content.clone().unwrap_or_default();
        let result = serde_json::from_str::<ToolResult>(&raw)
            .unwrap_or_else(|_| ToolResult::ok(Value::String(raw), Vec::new()));
        TurnContent::ToolResult { call_id: call_id.clone(), name: msg.name.clone().unwrap_or_default(), result }
    } else {
        TurnContent::Text { text: msg.content.clone().unwrap_or_default() }
    };
    Ok(ConversationTurn { role, content, refs: Vec::new() })
}

pub fn response_from_wire(resp: &WireChatResponse) -> Result<ChatResponse, ProviderError> {
    let choice = resp.choices.first().ok_or_else(|| ProviderError::Malformed("response has no choices".into()))?;
    match choice.message.tool_calls.as_ref().filter(|c| !c.is_empty()) {
        Some(calls) => Ok(ChatResponse::ToolCalls { tool_calls: wire_calls(calls)? }),
        None => Ok(ChatResponse::FinalText { text: choice.message.content.clone().unwrap_or_default() }),
    }
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn new(base_url: &str, model: &str) -> Self {
        Self {
            base_url: base_url.trim_end_matches('/').to_owned(),
            model: model.to_owned(),
            api_key: None,
            timeout: Duration::from_secs(60),
        }
    }

    pub fn with_api_key(mut self, key: Option<String>) -> Self {
        self.api_key = key;
        self
    }
}

struct Http {
    cfg: RemoteConfig,
    client: reqwest::blocking::Client,
}

impl Http {
    fn new(cfg: RemoteConfig) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| ProviderError::Failure(format!("http client: {e}")))?;
        Ok(Self { cfg, client })
    }

    fn post<Req: Serialize, Resp: for<'de> Deserialize<'de>>(&self, path: &str, body: &Req) -> Result<Resp, ProviderError> {
        let url = format!("{}{path}", self.cfg.base_url);
        let mut rb = self.client.post(&url).json(body);
        if let Some(key) = &self.cfg.api_key {
            rb = rb.bearer_auth(key);
        }
        let resp = rb.send().map_err(|e| ProviderError::Failure(format!("POST {url}: {e}")))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| ProviderError::Failure(format!("POST {url}: reading body: {e}")))?;
        if !status.is_success() {
            return Err(ProviderError::Failure(format!("POST {url}: HTTP {status}: {text}")));
        }
        serde_json::from_str(&text).map_err(|e| ProviderError::Malformed(format!("POST {url}: {e}")))
    }
}

pub struct OpenAiChat {
    http: Http,
}

impl OpenAiChat {
    pub fn new(cfg: RemoteConfig) -> Result<Self, ProviderError> {
        Ok(Self { http: Http::new(cfg)? })
    }

    pub fn wire_request(&self, req: &ChatRequest) -> WireChatRequest {
        WireChatRequest {
            model: self.http.cfg.model.clone(),
            messages: req.messages.iter().map(turn_to_wire).collect(),
            tools: req.tools.iter().map(|t| t.to_schema()).collect(),
            temperature: req.temperature,
        }
    }
}

impl ChatProvider for OpenAiChat {
    fn name(&self) -> &str {
        &self.http.cfg.model
    }

    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        req.validate()?;
        let resp: WireChatResponse = self.http.post("/chat/completions", &self.wire_request(req))?;
        response_from_wire(&resp)
    }
}

pub struct OpenAiEmbedder {
    http: Http,
    dimension: usize,
}

impl OpenAiEmbedder {
    pub fn new(cfg: RemoteConfig, dimension: usize) -> Result<Self, ProviderError> {
        Ok(Self { http: Http::new(cfg)?, dimension })
    }
}

impl Embedder for OpenAiEmbedder {
    fn model_id(&self) -> &str {
        &self.http.cfg.model
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let req = WireEmbeddingRequest { model: self.http.cfg.model.clone(), input: texts.to_vec() };
        let mut resp: WireEmbeddingResponse = self.http.post("/embeddings", &req)?;
        if resp.data.len() != texts.len() {
            return Err(ProviderError::Malformed(format!("expected {} embeddings, got {}", texts.len(), resp.data.len())));
        }
        resp.data.sort_by_key(|e| e.index);
        resp.data
            .into_iter()
            .map(|e| {
                if e.embedding.len() != self.dimension {
                    Err(ProviderError::Malformed(format!(
                        "embedding has dimension {}, expected {}",
                        e.embedding.len(),
                        self.dimension
                    )))
                } else {
                    Ok(e.embedding)
                }
            })
            .collect()
    }
}
