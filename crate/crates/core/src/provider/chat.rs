use std::collections::{BTreeSet, HashSet};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::ProviderError;
use crate::protocol::{ConversationTurn, Role, ToolCall, ToolDescriptor, TurnContent};
use crate::text::{content_words, split_sentences};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<ConversationTurn>,
    pub tools: Vec<ToolDescriptor>,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u32>,
}

impl ChatRequest {
    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.messages.is_empty() {
            return Err(ProviderError::InvalidRequest("request has no messages".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(ProviderError::InvalidRequest("temperature must be >= 0".into()));
        }
        let mut names = HashSet::new();
        for t in &self.tools {
            if t.name.is_empty() || !names.insert(t.name.as_str()) {
                return Err(ProviderError::InvalidRequest(format!("invalid or duplicate tool name `{}`", t.name)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChatResponse {
    FinalText { text: String },
    ToolCalls { tool_calls: Vec<ToolCall> },
}

impl ChatResponse {
    pub fn text(text: impl Into<String>) -> Self {
        ChatResponse::FinalText { text: text.into() }
    }

    pub fn calls(tool_calls: Vec<ToolCall>) -> Self {
        ChatResponse::ToolCalls { tool_calls }
    }
}

pub trait ChatProvider: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, ProviderError>;
}

/// Replays a fixed response sequence, one entry per `complete` call.
/// Tool calls without an id get `call_{position}_{index}`.
#[derive(Debug)]
pub struct ScriptedChat {
    script: Vec<ChatResponse>,
    position: Mutex<usize>,
}

impl ScriptedChat {
    pub fn new(script: Vec<ChatResponse>) -> Self {
        Self { script, position: Mutex::new(0) }
    }

    /// Loads a JSON array of responses, e.g.
    /// `[{"kind":"tool_calls","tool_calls":[{"name":"search_documents","arguments":{"query":"dams"}}]},
    ///   {"kind":"final_text","text":"..."}]`.
    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let script = serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        Ok(Self::new(script))
    }

    pub fn position(&self) -> usize {
        *self.position.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn reset(&self) {
        *self.position.lock().unwrap_or_else(|p| p.into_inner()) = 0;
    }
}

impl ChatProvider for ScriptedChat {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        req.validate()?;
        let mut pos = self.position.lock().unwrap_or_else(|p| p.into_inner());
        let Some(resp) = self.script.get(*pos) else {
            return Err(ProviderError::ScriptExhausted(self.script.len()));
        };
        let mut resp = resp.clone();
        if let ChatResponse::ToolCalls { tool_calls } = &mut resp {
            for (i, c) in tool_calls.iter_mut().enumerate() {
                if c.call_id.is_empty() {
                    c.call_id = format!("call_{}_{i}", *pos);
                }
            }
        }
        *pos += 1;
        Ok(resp)
    }
}

/// Deterministic stand-in for a real model, usable without a script:
/// a fresh user question triggers `search_documents` with the question as
/// the query; tool results are answered with the sentence of each of the top
/// two snippets that shares the most content words with the question;
/// validation errors become a clarifying question.
#[derive(Debug, Default, Clone)]
pub struct RuleChat;

impl RuleChat {
    fn best_sentence(text: &str, question: &BTreeSet<String>) -> Option<String> {
        let body: Vec<&str> = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect();
        let mut best: Option<(usize, String)> = None;
        for s in split_sentences(&body.join("\n")) {
            let s = s.trim().to_owned();
            if s.is_empty() {
                continue;
            }
            let shared = content_words(&s).intersection(question).count();
            if best.as_ref().is_none_or(|(n, _)| shared > *n) {
                best = Some((shared, s));
            }
        }
        best.map(|(_, s)| s)
    }

    fn answer_from_results(question: &str, results: &[&Value]) -> String {
        let q = content_words(question);
        let mut sentences: Vec<String> = Vec::new();
        for content in results {
            if let Some(snippets) = content.get("snippets").and_then(Value::as_array) {
                for s in snippets.iter().take(2) {
                    if let Some(best) = s.get("text").and_then(Value::as_str).and_then(|t| Self::best_sentence(t, &q)) {
                        if !sentences.contains(&best) {
                            sentences.push(best);
                        }
                    }
                }
            }
        }
        if sentences.is_empty() {
            "No matching documents were found for this question.".into()
        } else {
            sentences.join(" ")
        }
    }
}

impl ChatProvider for RuleChat {
    fn name(&self) -> &str {
        "rule"
    }

    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        req.validate()?;
        let last_user = req.messages.iter().rposition(|t| t.role == Role::User);
        let Some(last_user) = last_user else {
            return Ok(ChatResponse::text("How can I help?"));
        };
        let since: Vec<&ConversationTurn> = req.messages[last_user + 1..].iter().collect();
        if since.is_empty() {
            let question = req.messages[last_user].text().unwrap_or_default();
            if req.tools.iter().any(|t| t.name == "search_documents") {
                return Ok(ChatResponse::calls(vec![ToolCall::new(
                    &format!("rule_{}", req.messages.len()),
                    "search_documents",
                    json!({ "query": question }),
                )]));
            }
            return Ok(ChatResponse::text("No tools are available to answer this question."));
        }
        let mut ok_results = Vec::new();
        for turn in since {
            if let TurnContent::ToolResult { result, .. } = &turn.content {
                if result.ok {
                    ok_results.push(&result.content);
                } else {
                    let missing = result.content.get("missing").and_then(Value::as_array);
                    if let Some(m) = missing.filter(|m| !m.is_empty()) {
                        let names: Vec<&str> = m.iter().filter_map(Value::as_str).collect();
                        return Ok(ChatResponse::text(format!(
                            "Could you tell me the {} you are interested in?",
                            names.join(" and ")
                        )));
                    }
                    let msg = result.content.get("message").and_then(Value::as_str).unwrap_or("the tool failed");
                    return Ok(ChatResponse::text(format!("I could not complete that request: {msg}")));
                }
            }
        }
        let question = req.messages[last_user].text().unwrap_or_default();
        Ok(ChatResponse::text(Self::answer_from_results(question, &ok_results)))
    }
}
