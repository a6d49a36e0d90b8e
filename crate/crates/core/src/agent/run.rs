use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::session::{Session, SessionError};
use super::{RegistryError, ToolError, ToolRegistry};
use crate::chart::ChartSpec;
use crate::protocol::{ConversationTurn, Role, Table, ToolCall, ToolResult, TurnContent};
use crate::provider::{ChatProvider, ChatRequest, ChatResponse, ProviderError};
use crate::source::SourceRef;

pub const DEFAULT_MAX_ROUNDS: u32 = 8;

pub const DEFAULT_SYSTEM_PROMPT: &str = "You are a water-resources assistant for the Limpopo River Basin. \
Prefer calling the available tools over answering from memory: search the document library for reports and \
studies, and use the hydrology tools for station data, rainfall, water availability and environmental-flow alerts. \
Cite the sources returned by the tools. Never invent numbers, stations or documents; if the tools return nothing, \
say so. If a tool reports missing or invalid parameters, ask the user for exactly those values. \
Answer in the language the user writes in.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerStatus {
    Complete,
    RoundLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub session_id: String,
    pub text: String,
    pub status: AnswerStatus,
    pub refs: Vec<SourceRef>,
    /// Provider calls made for this turn.
    pub rounds: u32,
    #[serde(default, rename = "chart_spec", skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    /// Turns appended to the transcript by this turn, starting with the
    /// option hint (if any) and the user turn.
    pub turns: Vec<ConversationTurn>,
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("empty user message")]
    EmptyMessage,
}

/// The tool-calling loop: provider, tools and prompt, shared across sessions.
pub struct Agent {
    provider: Arc<dyn ChatProvider>,
    registry: Arc<ToolRegistry>,
    system_prompt: String,
    max_rounds: u32,
    temperature: f64,
}

impl Agent {
    pub fn new(provider: Arc<dyn ChatProvider>, registry: Arc<ToolRegistry>) -> Self {
        Self { provider, registry, system_prompt: DEFAULT_SYSTEM_PROMPT.into(), max_rounds: DEFAULT_MAX_ROUNDS, temperature: 0.0 }
    }

    pub fn with_system_prompt(mut self, prompt: impl Into<String>) -> Self {
        self.system_prompt = prompt.into();
        self
    }

    pub fn with_max_rounds(mut self, n: u32) -> Self {
        self.max_rounds = n.max(1);
        self
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    pub fn registry(&self) -> &ToolRegistry {
        &self.registry
    }

    pub fn provider_name(&self) -> &str {
        self.provider.name()
    }

    pub fn max_rounds(&self) -> u32 {
        self.max_rounds
    }

    /// Runs one user turn to completion. The transcript is only extended
    /// when the turn produces an answer; a provider failure leaves it as is.
    pub fn run_turn(&self, session: &Session, user_text: &str) -> Result<Answer, AgentError> {
        self.run_turn_with_hint(session, user_text, None)
    }

    /// Like [`Agent::run_turn`], with an extra system hint recorded in the
    /// transcript just before the user turn (used by starter options).
    pub fn run_turn_with_hint(&self, session: &Session, user_text: &str, hint: Option<&str>) -> Result<Answer, AgentError> {
        if user_text.trim().is_empty() {
            return Err(AgentError::EmptyMessage);
        }
        let mut state = session.lock();
        let mut messages = Vec::with_capacity(state.turns.len() + 2);
        messages.push(ConversationTurn::system(&self.system_prompt));
        messages.extend(state.turns.iter().cloned());
        let first_new = messages.len();
        if let Some(h) = hint.filter(|h| !h.trim().is_empty()) {
            messages.push(ConversationTurn::system(h));
        }
        messages.push(ConversationTurn::user(user_text));

        let tools = self.registry.descriptors();
        let mut refs: Vec<SourceRef> = Vec::new();
        let mut chart = None;
        let mut table = None;
        let mut executed: Vec<String> = Vec::new();
        let mut rounds = 0;
        let mut final_text = None;

        while rounds < self.max_rounds {
            let req = ChatRequest {
                messages: messages.clone(),
                tools: tools.clone(),
                temperature: self.temperature,
                max_rounds: Some(self.max_rounds),
            };
            rounds += 1;
            match self.provider.complete(&req)? {
                ChatResponse::FinalText { text } => {
                    final_text = Some(text);
                    break;
                }
                ChatResponse::ToolCalls { tool_calls } => {
                    let calls = assign_call_ids(tool_calls, rounds);
                    messages.push(ConversationTurn::tool_calls(calls.clone()));
                    for call in &calls {
                        let result = self.dispatch(call);
                        if result.ok {
                            executed.push(call.name.clone());
                            for r in &result.refs {
                                if !refs.contains(r) {
                                    refs.push(r.clone());
                                }
                            }
                            if result.chart.is_some() {
                                chart = result.chart.clone();
                            }
                            if result.table.is_some() {
                                table = result.table.clone();
                            }
                        }
                        messages.push(ConversationTurn::tool_result(call, result));
                    }
                }
            }
        }

        let (text, status) = match final_text {
            Some(t) => (t, AnswerStatus::Complete),
            None => (round_limit_text(self.max_rounds, &executed), AnswerStatus::RoundLimit),
        };
        messages.push(ConversationTurn::assistant(&text, refs.clone()));
        let turns = messages.split_off(first_new);
        let answer = Answer { session_id: session.id().to_owned(), text, status, refs, rounds, chart, table, turns: turns.clone() };
        session.commit(&mut state, turns, answer.clone())?;
        Ok(answer)
    }

    /// Validation failures and unknown tools become error payloads so the
    /// model can recover; nothing invalid reaches a handler.
    fn dispatch(&self, call: &ToolCall) -> ToolResult {
        match self.registry.validate(call) {
            Ok(()) => self.registry.execute(call),
            Err(RegistryError::Invalid(v)) => v.to_result(),
            Err(RegistryError::UnknownTool(name)) => {
                ToolError::new("unknown_tool", format!("no tool named `{name}`; call one of the listed tools")).to_result()
            }
            Err(other) => ToolError::new("internal", other.to_string()).to_result(),
        }
    }
}

/// Fills empty ids and disambiguates duplicates within one response.
fn assign_call_ids(calls: Vec<ToolCall>, round: u32) -> Vec<ToolCall> {
    let mut seen = HashSet::new();
    calls
        .into_iter()
        .enumerate()
        .map(|(i, mut c)| {
            if c.call_id.is_empty() || !seen.insert(c.call_id.clone()) {
                c.call_id = format!("r{round}_c{i}");
                seen.insert(c.call_id.clone());
            }
            c
        })
        .collect()
}

fn round_limit_text(max_rounds: u32, executed: &[String]) -> String {
    if executed.is_empty() {
        format!("I stopped after {max_rounds} rounds of tool calls without reaching an answer, and no tool call succeeded. Please rephrase or narrow the question.")
    } else {
        format!(
            "I stopped after {max_rounds} rounds of tool calls without reaching a final answer. Partial progress: {} successful tool call(s) ({}). The sources gathered so far are listed below.",
            executed.len(),
            executed.join(", ")
        )
    }
}

/// Problems found by [`check_transcript`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptViolation {
    pub turn: usize,
    pub message: String,
}

/// Replays a transcript against a registry: every tool turn answers a call
/// of an earlier tool_calls turn, every call whose result is not a
/// validation or unknown-tool error passes descriptor validation, and every
/// reference on an assistant answer came from a tool result since the
/// preceding user turn.
pub fn check_transcript(turns: &[ConversationTurn], registry: &ToolRegistry) -> Vec<TranscriptViolation> {
    let mut out = Vec::new();
    let mut pending: Vec<ToolCall> = Vec::new();
    let mut seen_refs: Vec<SourceRef> = Vec::new();
    let mut answered = HashSet::new();
    for (i, t) in turns.iter().enumerate() {
        let mut bad = |m: String| out.push(TranscriptViolation { turn: i, message: m });
        match (&t.role, &t.content) {
            (Role::User, _) => {
                seen_refs.clear();
                pending.clear();
                answered.clear();
            }
            (Role::Assistant, TurnContent::ToolCalls { calls }) => pending.extend(calls.iter().cloned()),
            (Role::Tool, TurnContent::ToolResult { call_id, name, result }) => {
                let Some(call) = pending.iter().find(|c| &c.call_id == call_id) else {
                    bad(format!("tool result `{call_id}` answers no pending call"));
                    continue;
                };
                if &call.name != name {
                    bad(format!("tool result `{call_id}` names `{name}` but the call was `{}`", call.name));
                }
                if !answered.insert(call_id.clone()) {
                    bad(format!("call `{call_id}` answered twice"));
                }
                let rejected = !result.ok && matches!(result.content.get("error").and_then(|v| v.as_str()), Some("invalid_arguments" | "unknown_tool"));
                if !rejected {
                    if let Err(e) = registry.validate(call) {
                        bad(format!("executed call `{call_id}` fails validation: {e}"));
                    }
                }
                seen_refs.extend(result.refs.iter().cloned());
            }
            (Role::Assistant, TurnContent::Text { .. }) => {
                for r in &t.refs {
                    if !seen_refs.contains(r) {
                        bad(format!("answer reference {} has no originating tool result", r.describe()));
                    }
                }
            }
            _ => {}
        }
    }
    out
}
