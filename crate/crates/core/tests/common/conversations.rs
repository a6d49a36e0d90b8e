//! Scripted conversations for the orchestrator safety checks.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use basin_copilot::agent::{check_transcript, Answer, AnswerStatus};
use basin_copilot::protocol::{ConversationTurn, Role, TurnContent};
use basin_copilot::provider::{ChatProvider, ChatRequest, ChatResponse, ProviderError, ScriptedChat};
use basin_copilot::source::SourceRef;
use serde_json::json;

use super::Workspace;

pub const MAX_ROUNDS: u32 = 8;

/// Counts provider calls so the test does not rely on the agent's own tally.
pub struct Counting {
    inner: ScriptedChat,
    calls: AtomicUsize,
}

impl Counting {
    pub fn new(script: Vec<ChatResponse>) -> Self {
        Self { inner: ScriptedChat::new(script), calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChatProvider for Counting {
    fn name(&self) -> &str {
        "counting"
    }

    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(req)
    }
}

pub struct Conversation {
    pub name: &'static str,
    pub messages: Vec<&'static str>,
    pub script: serde_json::Value,
    /// Status expected for the last answer.
    pub status: AnswerStatus,
    /// Expected number of refs on the last answer, when fixed.
    pub refs: Option<usize>,
    pub chart: bool,
}

fn calls(c: serde_json::Value) -> serde_json::Value {
    json!({ "kind": "tool_calls", "tool_calls": c })
}

fn text(t: &str) -> serde_json::Value {
    json!({ "kind": "final_text", "text": t })
}

pub fn suite() -> Vec<Conversation> {
    let conv = |name, messages, script: Vec<serde_json::Value>, status, refs, chart| Conversation {
        name,
        messages,
        script: serde_json::Value::Array(script),
        status,
        refs,
        chart,
    };
    vec![
        conv(
            "document search",
            vec!["What are the environmental flow requirements on the Luvuvhu?"],
            vec![calls(json!([{"name": "search_documents", "arguments": {"query": "environmental flow requirement Luvuvhu", "k": 3}}])), text("See the assessments.")],
            AnswerStatus::Complete,
            Some(3),
            false,
        ),
        conv(
            "monthly rainfall table",
            vec!["Monthly rainfall at R01 in 2024?"],
            vec![calls(json!([{"name": "monthly_rainfall", "arguments": {"station_id": "R01", "year": 2024}}])), text("Here is the table.")],
            AnswerStatus::Complete,
            Some(1),
            false,
        ),
        conv(
            "missing parameter elicitation",
            vec!["Show me rainfall for R02", "2023 please"],
            vec![
                calls(json!([{"name": "monthly_rainfall", "arguments": {"station_id": "R02"}}])),
                text("Which year are you interested in?"),
                calls(json!([{"name": "monthly_rainfall", "arguments": {"station_id": "R02", "year": 2023}}])),
                text("Rainfall for 2023 is tabulated above."),
            ],
            AnswerStatus::Complete,
            Some(1),
            false,
        ),
        conv(
            "round limit",
            vec!["Keep checking the e-flow sites"],
            (0..12).map(|_| calls(json!([{"name": "list_eflow_sites", "arguments": {}}]))).collect(),
            AnswerStatus::RoundLimit,
            Some(1),
            false,
        ),
        conv(
            "unknown tool",
            vec!["Predict next year's floods"],
            vec![calls(json!([{"name": "flood_forecast", "arguments": {"river": "Limpopo"}}])), text("I cannot forecast floods with the available tools.")],
            AnswerStatus::Complete,
            Some(0),
            false,
        ),
        conv(
            "wrong argument type",
            vec!["Rainfall at R03 in twenty twenty four"],
            vec![
                calls(json!([{"name": "monthly_rainfall", "arguments": {"station_id": "R03", "year": "twenty"}}])),
                calls(json!([{"name": "monthly_rainfall", "arguments": {"station_id": "R03", "year": 2024}}])),
                text("Fixed the year and fetched the data."),
            ],
            AnswerStatus::Complete,
            Some(1),
            false,
        ),
        conv(
            "parallel calls",
            vec!["E-flow alerts and Olifants storage for December 2024"],
            vec![
                calls(json!([
                    {"name": "eflow_alerts", "arguments": {"period": "2024-12"}},
                    {"name": "water_availability", "arguments": {"river": "Olifants", "month": "2024-12"}}
                ])),
                text("One site is critical; storage is listed."),
            ],
            AnswerStatus::Complete,
            Some(2),
            false,
        ),
        conv(
            "comparison chart",
            vec!["Compare 2024 and 2023 rainfall at R01 as a chart"],
            vec![
                calls(json!([{"name": "chart_spec", "arguments": {"tool": "compare_rainfall", "params": {"station_id": "R01", "year_a": 2024, "year_b": 2023}, "chart_kind": "grouped_bar"}}])),
                text("Chart attached."),
            ],
            AnswerStatus::Complete,
            Some(1),
            true,
        ),
        conv(
            "nearest stations by river",
            vec!["Which rain gauges are near the Crocodile River?"],
            vec![calls(json!([{"name": "nearest_stations", "arguments": {"river": "Crocodile", "n": 5, "kind": "rainfall"}}])), text("Five gauges listed.")],
            AnswerStatus::Complete,
            Some(1),
            false,
        ),
        conv(
            "unknown station error",
            vec!["Rainfall at station X99 in 2024"],
            vec![calls(json!([{"name": "monthly_rainfall", "arguments": {"station_id": "X99", "year": 2024}}])), text("Station X99 does not exist.")],
            AnswerStatus::Complete,
            Some(0),
            false,
        ),
        conv(
            "search then chart",
            vec!["Summarise e-flow policy and chart December 2024 alerts"],
            vec![
                calls(json!([{"name": "search_documents", "arguments": {"query": "environmental flow policy", "k": 2}}])),
                calls(json!([{"name": "chart_spec", "arguments": {"tool": "eflow_alerts", "params": {"period": "2024-12"}, "chart_kind": "line"}}])),
                text("Policy summary with the alert chart."),
            ],
            AnswerStatus::Complete,
            Some(3),
            true,
        ),
        conv(
            "forecast availability",
            vec!["Expected Olifants storage in March 2025?"],
            vec![
                calls(json!([{"name": "water_availability", "arguments": {"river": "Olifants", "month": "2025-03", "horizon": "forecast"}}])),
                text("Forecast storage is shown, flagged as a forecast."),
            ],
            AnswerStatus::Complete,
            Some(1),
            false,
        ),
    ]
}

pub struct Outcome {
    pub answers: Vec<Answer>,
    /// Provider calls observed per user message.
    pub provider_calls: Vec<usize>,
    pub transcript: Vec<ConversationTurn>,
    pub violations: Vec<String>,
}

/// Runs a conversation against a fresh engine and checks the safety rules
/// directly on the produced turns.
pub fn run(ws: &Workspace, conv: &Conversation) -> Outcome {
    let script: Vec<ChatResponse> = serde_json::from_value(conv.script.clone()).expect("script parses");
    let chat = Arc::new(Counting::new(script));
    let mut cfg = ws.config();
    cfg.max_rounds = MAX_ROUNDS;
    let engine = ws.engine_with(cfg, chat.clone(), None);
    let session = engine.create_session(None).unwrap();
    let mut answers = Vec::new();
    let mut provider_calls = Vec::new();
    let mut violations = Vec::new();
    for m in &conv.messages {
        let before = chat.calls();
        let answer = engine.send_message(&session.session_id, m, None).expect("turn completes");
        let used = chat.calls() - before;
        if used > MAX_ROUNDS as usize {
            violations.push(format!("{used} provider calls exceed max_rounds"));
        }
        if used != answer.rounds as usize {
            violations.push(format!("answer reports {} rounds, provider saw {used}", answer.rounds));
        }
        violations.extend(turn_violations(&engine, &answer));
        provider_calls.push(used);
        answers.push(answer);
    }
    let transcript = engine.transcript(&session.session_id).unwrap().turns;
    for v in check_transcript(&transcript, engine.agent().registry()) {
        violations.push(format!("transcript turn {}: {}", v.turn, v.message));
    }
    Outcome { answers, provider_calls, transcript, violations }
}

fn turn_violations(engine: &basin_copilot::gateway::Engine, answer: &Answer) -> Vec<String> {
    let mut out = Vec::new();
    let mut calls = Vec::new();
    let mut result_refs: Vec<&SourceRef> = Vec::new();
    for t in &answer.turns {
        match (&t.role, &t.content) {
            (Role::Assistant, TurnContent::ToolCalls { calls: c }) => calls.extend(c.iter().cloned()),
            (Role::Tool, TurnContent::ToolResult { call_id, result, .. }) => {
                let call = calls.iter().find(|c| &c.call_id == call_id);
                match call {
                    None => out.push(format!("result {call_id} without a call")),
                    Some(c) => {
                        let valid = engine.agent().registry().validate(c).is_ok();
                        if result.ok && !valid {
                            out.push(format!("executed call {call_id} ({}) does not validate", c.name));
                        }
                    }
                }
                result_refs.extend(result.refs.iter());
            }
            _ => {}
        }
    }
    for r in &answer.refs {
        if !result_refs.contains(&r) {
            out.push(format!("answer ref {} not produced by a tool this turn", r.describe()));
        }
    }
    out
}
