//! Tool-calling conversation loop, sessions and exports.

mod export;
mod registry;
mod run;
mod session;

pub use export::{export_answer, ExportError, ExportFormat};
pub use registry::{validate_args, Args, InvalidParam, RegistryError, ToolError, ToolHandler, ToolRegistry, ValidationError};
pub use run::{check_transcript, Agent, AgentError, Answer, AnswerStatus, TranscriptViolation, DEFAULT_MAX_ROUNDS, DEFAULT_SYSTEM_PROMPT};
pub use session::{Session, SessionError, SessionState, SessionStore, Transcript, TranscriptRecord};
