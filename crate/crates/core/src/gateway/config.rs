//! Service configuration, read from TOML. Relative paths are resolved
//! against the directory of the config file.
//!
//! ```toml
//! bind = "127.0.0.1:8080"
//! index_path = "index.bcvx"
//! dataset_manifest = "fixtures/dataset.json"
//! data_dir = "sessions"
//! max_rounds = 8
//! top_k = 5
//!
//! [chat]
//! provider = "scripted"          # rule | scripted | openai
//! script = "script.json"
//!
//! [embedder]
//! provider = "mock"              # mock | openai
//! dimension = 256
//!
//! [eval]
//! token_env = "BASIN_EVAL_TOKEN"
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::provider::openai::RemoteConfig;
use crate::provider::MOCK_DIMENSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChatProviderKind {
    #[default]
    Rule,
    Scripted,
    Openai,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EmbedderKind {
    #[default]
    Mock,
    Openai,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JudgeKind {
    #[default]
    Rule,
    Openai,
}

/// Endpoint settings shared by the OpenAI-compatible backends. The API key
/// is read from the environment variable named by `api_key_env`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteSettings {
    pub base_url: String,
    pub model: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    60
}

impl RemoteSettings {
    pub fn resolve(&self) -> RemoteConfig {
        let api_key = self.api_key_env.as_ref().and_then(|v| std::env::var(v).ok());
        RemoteConfig {
            base_url: self.base_url.clone(),
            model: self.model.clone(),
            api_key,
            timeout: Duration::from_secs(self.timeout_secs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ChatSection {
    #[serde(default)]
    pub provider: ChatProviderKind,
    /// JSON response script for the scripted provider.
    #[serde(default)]
    pub script: Option<PathBuf>,
    #[serde(default)]
    pub remote: Option<RemoteSettings>,
    #[serde(default)]
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedderSection {
    #[serde(default)]
    pub provider: EmbedderKind,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub remote: Option<RemoteSettings>,
}

fn default_dimension() -> usize {
    MOCK_DIMENSION
}

impl Default for EmbedderSection {
    fn default() -> Self {
        Self { provider: EmbedderKind::Mock, dimension: MOCK_DIMENSION, remote: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct JudgeSection {
    #[serde(default)]
    pub provider: JudgeKind,
    #[serde(default)]
    pub remote: Option<RemoteSettings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    /// Environment variable holding the token for `POST /eval/run`. The
    /// endpoint is disabled when the variable is unset or empty.
    #[serde(default = "default_token_env")]
    pub token_env: String,
    #[serde(default = "default_n_questions")]
    pub n_questions: usize,
}

fn default_token_env() -> String {
    "BASIN_EVAL_TOKEN".into()
}

fn default_n_questions() -> usize {
    crate::eval::DEFAULT_N_QUESTIONS
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { token_env: default_token_env(), n_questions: default_n_questions() }
    }
}

/// Optional HTTP dataset source used instead of the CSV manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteDatasetSection {
    pub base_url: String,
    pub dataset_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_bind")]
    pub bind: String,
    pub index_path: PathBuf,
    #[serde(default)]
    pub dataset_manifest: Option<PathBuf>,
    #[serde(default)]
    pub remote_dataset: Option<RemoteDatasetSection>,
    /// Transcript directory; sessions live in memory only when unset.
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default)]
    pub system_prompt: Option<String>,
    /// RFC 3339 timestamp; pins every transcript and dataset timestamp.
    #[serde(default)]
    pub fixed_clock: Option<String>,
    #[serde(default)]
    pub chat: ChatSection,
    #[serde(default)]
    pub embedder: EmbedderSection,
    #[serde(default)]
    pub judge: JudgeSection,
    #[serde(default)]
    pub eval: EvalSection,
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

fn default_max_rounds() -> u32 {
    crate::agent::DEFAULT_MAX_ROUNDS
}

fn default_top_k() -> usize {
    crate::index::DEFAULT_TOP_K
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl Config {
    /// Minimal configuration: rule-based chat, mock embedder, in-memory sessions.
    pub fn new(index_path: impl Into<PathBuf>, dataset_manifest: Option<PathBuf>) -> Self {
        Self {
            bind: default_bind(),
            index_path: index_path.into(),
            dataset_manifest,
            remote_dataset: None,
            data_dir: None,
            max_rounds: default_max_rounds(),
            top_k: default_top_k(),
            system_prompt: None,
            fixed_clock: None,
            chat: ChatSection::default(),
            embedder: EmbedderSection::default(),
            judge: JudgeSection::default(),
            eval: EvalSection::default(),
        }
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Parse { path: "<inline>".into(), message: e.to_string() })?;
        cfg.resolve_paths(base_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse { path: path.display().to_string(), message },
            other => other,
        })
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.index_path);
        if let Some(p) = self.dataset_manifest.as_mut() {
            fix(p);
        }
        if let Some(p) = self.data_dir.as_mut() {
            fix(p);
        }
        if let Some(p) = self.chat.script.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.max_rounds == 0 {
            return bad("max_rounds must be at least 1");
        }
        if self.top_k == 0 {
            return bad("top_k must be at least 1");
        }
        if self.dataset_manifest.is_some() && self.remote_dataset.is_some() {
            return bad("set either dataset_manifest or remote_dataset, not both");
        }
        if self.chat.provider == ChatProviderKind::Scripted && self.chat.script.is_none() {
            return bad("chat.provider = \"scripted\" needs chat.script");
        }
        if self.chat.provider == ChatProviderKind::Openai && self.chat.remote.is_none() {
            return bad("chat.provider = \"openai\" needs a [chat.remote] section");
        }
        if self.embedder.provider == EmbedderKind::Openai && self.embedder.remote.is_none() {
            return bad("embedder.provider = \"openai\" needs an [embedder.remote] section");
        }
        if self.judge.provider == JudgeKind::Openai && self.judge.remote.is_none() {
            return bad("judge.provider = \"openai\" needs a [judge.remote] section");
        }
        if self.embedder.dimension == 0 {
            return bad("embedder.dimension must be positive");
        }
        if let Some(c) = &self.fixed_clock {
            if chrono::DateTime::parse_from_rfc3339(c).is_err() {
                return Err(ConfigError::Invalid(format!("fixed_clock `{c}` is not an RFC 3339 timestamp")));
            }
        }
        Ok(())
    }
}
