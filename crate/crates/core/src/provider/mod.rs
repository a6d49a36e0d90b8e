//! Chat, embedding and judge contracts with deterministic offline mocks and
//! an OpenAI-compatible HTTP backend.

mod chat;
mod embed;
mod judge;
pub mod openai;

pub use chat::{ChatProvider, ChatRequest, ChatResponse, RuleChat, ScriptedChat};
pub use embed::{cosine, l2_normalize, Embedder, MockEmbedder, MOCK_DIMENSION};
pub use judge::{Judge, JudgeInput, JudgeTask, JudgeVerdict, LlmJudge, RuleJudge, VerdictPayload};

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    /// Transport or remote-side failure.
    #[error("provider failure: {0}")]
    Failure(String),
    #[error("scripted provider exhausted after {0} responses")]
    ScriptExhausted(usize),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("malformed provider response: {0}")]
    Malformed(String),
}
