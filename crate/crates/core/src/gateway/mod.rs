//! HTTP service over the engine: sessions, messages, transcripts, exports,
//! tool metadata, evaluation and health.

mod config;
mod engine;
mod http;
mod options;

pub use config::{
    ChatProviderKind, ChatSection, Config, ConfigError, EmbedderKind, EmbedderSection, EvalSection, JudgeKind, JudgeSection,
    RemoteDatasetSection, RemoteSettings,
};
pub use engine::{DatasetStats, Engine, EngineError, EngineParts, Health, SessionInfo};
pub use http::{router, serve, shutdown_signal, ErrorBody};
pub use options::{option_hint, StarterOption, StarterOptionId, STARTER_OPTIONS};
