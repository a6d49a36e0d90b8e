use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ChatProvider, ChatRequest, ChatResponse, ProviderError};
use crate::protocol::ConversationTurn;
use crate::text::{content_words, normalized_padded, split_sentences};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeTask {
    StatementSupported,
    ChunkRelevant,
    StatementDecomposition,
    QuestionGeneration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum JudgeInput {
    /// One verdict per statement: is it supported by `context`?
    StatementSupported { statements: Vec<String>, context: String },
    /// One verdict per chunk: is it relevant to `reference`?
    ChunkRelevant { chunks: Vec<String>, reference: String },
    StatementDecomposition { text: String },
    QuestionGeneration { answer: String, n: usize },
}

impl JudgeInput {
    pub fn task(&self) -> JudgeTask {
        match self {
            JudgeInput::StatementSupported { .. } => JudgeTask::StatementSupported,
            JudgeInput::ChunkRelevant { .. } => JudgeTask::ChunkRelevant,
            JudgeInput::StatementDecomposition { .. } => JudgeTask::StatementDecomposition,
            JudgeInput::QuestionGeneration { .. } => JudgeTask::QuestionGeneration,
        }
    }

    fn expected_flags(&self) -> Option<usize> {
        match self {
            JudgeInput::StatementSupported { statements, .. } => Some(statements.len()),
            JudgeInput::ChunkRelevant { chunks, .. } => Some(chunks.len()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictPayload {
    Flags(Vec<bool>),
    Statements(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub task: JudgeTask,
    pub payload: VerdictPayload,
}

impl JudgeVerdict {
    pub fn into_flags(self) -> Result<Vec<bool>, ProviderError> {
        match self.payload {
            VerdictPayload::Flags(f) => Ok(f),
            VerdictPayload::Statements(_) => Err(ProviderError::Malformed("expected boolean verdicts".into())),
        }
    }

    pub fn into_statements(self) -> Result<Vec<String>, ProviderError> {
        match self.payload {
            VerdictPayload::Statements(s) => Ok(s),
            VerdictPayload::Flags(_) => Err(ProviderError::Malformed("expected statements".into())),
        }
    }
}

pub trait Judge: Send + Sync {
    fn judge(&self, input: &JudgeInput) -> Result<JudgeVerdict, ProviderError>;
}

/// Minimum shared content words for the rule judge to call a chunk relevant.
pub const RELEVANCE_MIN_SHARED_WORDS: usize = 3;

/// Rule-based judge. Every verdict is a pure function of its input:
///
/// * supported: the word-normalized statement occurs in the word-normalized context
/// * relevant: chunk and reference share at least three distinct non-stopword tokens
/// * decomposition: sentence split on `.`/`!`/`?` followed by whitespace
/// * question generation: the first sentence, terminator dropped, prefixed
///   with "When" if it contains a digit and "What" otherwise, repeated `n` times
#[derive(Debug, Default, Clone)]
pub struct RuleJudge;

impl RuleJudge {
    pub fn supported(statement: &str, context: &str) -> bool {
        let s = normalized_padded(statement);
        !s.is_empty() && normalized_padded(context).contains(&s)
    }

    pub fn relevant(chunk: &str, reference: &str) -> bool {
        let reference = content_words(reference);
        content_words(chunk).intersection(&reference).count() >= RELEVANCE_MIN_SHARED_WORDS
    }

    pub fn question_for(answer: &str) -> Option<String> {
        let first = split_sentences(answer).into_iter().next()?;
        let body = first.trim_end_matches(['.', '!', '?']).trim();
        if body.is_empty() {
            return None;
        }
        let lead = if body.chars().any(|c| c.is_ascii_digit()) { "When" } else { "What" };
        Some(format!("{lead} {body}?"))
    }
}

impl Judge for RuleJudge {
    fn judge(&self, input: &JudgeInput) -> Result<JudgeVerdict, ProviderError> {
        let payload = match input {
            JudgeInput::StatementSupported { statements, context } => {
                VerdictPayload::Flags(statements.iter().map(|s| Self::supported(s, context)).collect())
            }
            JudgeInput::ChunkRelevant { chunks, reference } => {
                VerdictPayload::Flags(chunks.iter().map(|c| Self::relevant(c, reference)).collect())
            }
            JudgeInput::StatementDecomposition { text } => VerdictPayload::Statements(split_sentences(text)),
            JudgeInput::QuestionGeneration { answer, n } => VerdictPayload::Statements(
                Self::question_for(answer).map(|q| vec![q; *n]).unwrap_or_default(),
            ),
        };
        Ok(JudgeVerdict { task: input.task(), payload })
    }
}

/// Judge backed by a chat model. The model is asked to reply with a JSON
/// object: `{"verdicts": [bool, ...]}` for boolean tasks or
/// `{"statements": [string, ...]}` otherwise.
pub struct LlmJudge<C> {
    chat: C,
}

impl<C: ChatProvider> LlmJudge<C> {
    pub fn new(chat: C) -> Self {
        Self { chat }
    }

    fn prompt(input: &JudgeInput) -> String {
        match input {
            JudgeInput::StatementSupported { statements, context } => format!(
                "Context:\n{context}\n\nFor each statement below decide whether it can be directly inferred from the context. \
                 Reply only with JSON {{\"verdicts\": [true|false, ...]}} with exactly {} entries.\n{}",
                statements.len(),
                numbered(statements)
            ),
            JudgeInput::ChunkRelevant { chunks, reference } => format!(
                "Reference answer:\n{reference}\n\nFor each context chunk below decide whether it was useful in arriving at the reference answer. \
                 Reply only with JSON {{\"verdicts\": [true|false, ...]}} with exactly {} entries.\n{}",
                chunks.len(),
                numbered(chunks)
            ),
            JudgeInput::StatementDecomposition { text } => format!(
                "Break the following text into short standalone factual statements. \
                 Reply only with JSON {{\"statements\": [...]}}.\n\n{text}"
            ),
            JudgeInput::QuestionGeneration { answer, n } => format!(
                "Write {n} questions that the following answer responds to. \
                 Reply only with JSON {{\"statements\": [...]}} containing the questions.\n\n{answer}"
            ),
        }
    }
}

fn numbered(items: &[String]) -> String {
    items.iter().enumerate().map(|(i, s)| format!("{}. {s}", i + 1)).collect::<Vec<_>>().join("\n")
}

impl<C: ChatProvider> Judge for LlmJudge<C> {
    fn judge(&self, input: &JudgeInput) -> Result<JudgeVerdict, ProviderError> {
        let req = ChatRequest {
            messages: vec![
                ConversationTurn::system("You are a strict evaluation judge. Answer with JSON only."),
                ConversationTurn::user(Self::prompt(input)),
            ],
            tools: vec![],
            temperature: 0.0,
            max_rounds: None,
        };
        let text = match self.chat.complete(&req)? {
            ChatResponse::FinalText { text } => text,
            ChatResponse::ToolCalls { .. } => return Err(ProviderError::Malformed("judge replied with tool calls".into())),
        };
        let json = extract_json(&text).ok_or_else(|| ProviderError::Malformed(format!("no JSON object in `{text}`")))?;
        let payload = match input.expected_flags() {
            Some(n) => {
                let flags: Vec<bool> = json
                    .get("verdicts")
                    .and_then(Value::as_array)
                    .map(|a| a.iter().filter_map(Value::as_bool).collect())
                    .ok_or_else(|| ProviderError::Malformed("missing `verdicts`".into()))?;
                if flags.len() != n {
                    return Err(ProviderError::Malformed(format!("expected {n} verdicts, got {}", flags.len())));
                }
                VerdictPayload::Flags(flags)
            }
            None => VerdictPayload::Statements(
                json.get("statements")
                    .and_then(Value::as_array)
                    .map(|a| a.iter().filter_map(Value::as_str).map(str::to_owned).collect())
                    .ok_or_else(|| ProviderError::Malformed("missing `statements`".into()))?,
            ),
        };
        Ok(JudgeVerdict { task: input.task(), payload })
    }
}

fn extract_json(text: &str) -> Option<Value> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    serde_json::from_str(text.get(start..=end)?).ok()
}
