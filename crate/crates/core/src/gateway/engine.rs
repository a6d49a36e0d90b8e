use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{ChatProviderKind, Config, EmbedderKind, JudgeKind};
use super::options::{option_hint, StarterOption, STARTER_OPTIONS};
use crate::agent::{export_answer, Agent, AgentError, Answer, ExportError, ExportFormat, SessionError, SessionStore, ToolRegistry, Transcript};
use crate::clock::Clock;
use crate::docsearch::DocSearch;
use crate::eval::{load_eval_dataset, run_evaluation, AgentSut, EvalError, EvalSample, MetricReport};
use crate::hydro::{CsvSource, DatasetSource, Datasets, HydroError, HydroTools, RemoteSource};
use crate::index::{IndexError, IndexStats, VectorIndex};
use crate::protocol::ToolDescriptor;
use crate::provider::openai::{OpenAiChat, OpenAiEmbedder};
use crate::provider::{ChatProvider, Embedder, Judge, LlmJudge, MockEmbedder, ProviderError, RuleChat, RuleJudge, ScriptedChat};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("session `{0}` not found")]
    SessionNotFound(String),
    #[error("message text is empty")]
    EmptyMessage,
    #[error("unknown starter option `{0}`")]
    UnknownOption(String),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("provider failure: {0}")]
    Provider(ProviderError),
    #[error("session store: {0}")]
    Store(String),
    #[error("invalid session request: {0}")]
    BadSession(String),
    #[error("the evaluation endpoint is disabled (no token configured)")]
    EvalDisabled,
    #[error("missing or wrong evaluation token")]
    Unauthorized,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("index: {0}")]
    Index(#[from] IndexError),
    #[error("dataset: {0}")]
    Dataset(#[from] HydroError),
    #[error("startup: {0}")]
    Startup(String),
}

impl From<SessionError> for EngineError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::NotFound(id) => EngineError::SessionNotFound(id),
            SessionError::AlreadyExists(_) | SessionError::InvalidId(_) => EngineError::BadSession(e.to_string()),
            SessionError::Store(m) => EngineError::Store(m),
        }
    }
}

impl From<AgentError> for EngineError {
    fn from(e: AgentError) -> Self {
        match e {
            AgentError::Provider(p) => EngineError::Provider(p),
            AgentError::Session(s) => s.into(),
            AgentError::EmptyMessage => EngineError::EmptyMessage,
        }
    }
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::SessionNotFound(_) => "session_not_found",
            EngineError::EmptyMessage => "empty_message",
            EngineError::UnknownOption(_) => "unknown_option",
            EngineError::Export(ExportError::NothingToExport) => "nothing_to_export",
            EngineError::Export(ExportError::NoTabularResult) => "no_tabular_result",
            EngineError::Export(ExportError::UnknownFormat(_)) => "unknown_format",
            EngineError::Provider(_) => "provider_failure",
            EngineError::Store(_) => "store_error",
            EngineError::BadSession(_) => "invalid_session",
            EngineError::EvalDisabled => "eval_disabled",
            EngineError::Unauthorized => "unauthorized",
            EngineError::Eval(_) => "eval_dataset_error",
            EngineError::Index(_) => "index_error",
            EngineError::Dataset(_) => "dataset_error",
            EngineError::Startup(_) => "startup_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub created_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub dataset_id: String,
    pub stations: usize,
    pub points: usize,
    pub eflow_thresholds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub name: String,
    pub version: String,
    pub chat_provider: String,
    pub tools: usize,
    pub index: IndexStats,
    pub dataset: DatasetStats,
}

/// Everything a running service needs, shared by the HTTP layer, the CLI
/// and the C interface.
pub struct Engine {
    config: Config,
    clock: Clock,
    agent: Arc<Agent>,
    store: SessionStore,
    hydro: Arc<HydroTools>,
    docs: Arc<DocSearch>,
    embedder: Arc<dyn Embedder>,
    judge: Arc<dyn Judge>,
    eval_token: Option<String>,
}

/// Pre-built parts for [`Engine::assemble`].
pub struct EngineParts {
    pub index: VectorIndex,
    pub datasets: Datasets,
    pub chat: Arc<dyn ChatProvider>,
    pub embedder: Arc<dyn Embedder>,
    pub judge: Arc<dyn Judge>,
    pub eval_token: Option<String>,
}

impl Engine {
    /// Loads the index, dataset and providers named by the config.
    pub fn build(config: Config) -> Result<Self, EngineError> {
        let embedder: Arc<dyn Embedder> = match config.embedder.provider {
            EmbedderKind::Mock => Arc::new(MockEmbedder::new(config.embedder.dimension)),
            EmbedderKind::Openai => {
                let remote = config.embedder.remote.as_ref().ok_or_else(|| EngineError::Startup("missing [embedder.remote]".into()))?;
                Arc::new(OpenAiEmbedder::new(remote.resolve(), config.embedder.dimension).map_err(|e| EngineError::Startup(e.to_string()))?)
            }
        };
        let chat: Arc<dyn ChatProvider> = match config.chat.provider {
            ChatProviderKind::Rule => Arc::new(RuleChat),
            ChatProviderKind::Scripted => {
                let path = config.chat.script.as_ref().ok_or_else(|| EngineError::Startup("missing chat.script".into()))?;
                Arc::new(ScriptedChat::from_file(path).map_err(|e| EngineError::Startup(format!("{}: {e}", path.display())))?)
            }
            ChatProviderKind::Openai => {
                let remote = config.chat.remote.as_ref().ok_or_else(|| EngineError::Startup("missing [chat.remote]".into()))?;
                Arc::new(OpenAiChat::new(remote.resolve()).map_err(|e| EngineError::Startup(e.to_string()))?)
            }
        };
        let judge: Arc<dyn Judge> = match config.judge.provider {
            JudgeKind::Rule => Arc::new(RuleJudge),
            JudgeKind::Openai => {
                let remote = config.judge.remote.as_ref().ok_or_else(|| EngineError::Startup("missing [judge.remote]".into()))?;
                Arc::new(LlmJudge::new(OpenAiChat::new(remote.resolve()).map_err(|e| EngineError::Startup(e.to_string()))?))
            }
        };
        let index = VectorIndex::load(&config.index_path)?;
        let datasets = if let Some(m) = &config.dataset_manifest {
            CsvSource::new(m).load()?
        } else if let Some(r) = &config.remote_dataset {
            RemoteSource::new(&r.base_url, &r.dataset_id)?.load()?
        } else {
            Datasets::default()
        };
        let eval_token = std::env::var(&config.eval.token_env).ok().filter(|t| !t.is_empty());
        Self::assemble(config, EngineParts { index, datasets, chat, embedder, judge, eval_token })
    }

    pub fn build_from_file(path: &Path) -> Result<Self, EngineError> {
        let cfg = Config::load(path).map_err(|e| EngineError::Startup(e.to_string()))?;
        Self::build(cfg)
    }

    pub fn assemble(config: Config, parts: EngineParts) -> Result<Self, EngineError> {
        config.validate().map_err(|e| EngineError::Startup(e.to_string()))?;
        if parts.index.embed_model_id() != parts.embedder.model_id() {
            return Err(EngineError::Startup(format!(
                "index was built with `{}` but the configured embedder is `{}`",
                parts.index.embed_model_id(),
                parts.embedder.model_id()
            )));
        }
        let clock = match &config.fixed_clock {
            Some(c) => Clock::fixed_from_str(c).map_err(|e| EngineError::Startup(e.to_string()))?,
            None => Clock::System,
        };
        let docs = Arc::new(DocSearch::new(Arc::new(parts.index), parts.embedder.clone()).with_default_k(config.top_k));
        let hydro = Arc::new(HydroTools::new(parts.datasets, clock.clone()));
        let mut registry = ToolRegistry::new();
        let reg_err = |e: crate::agent::RegistryError| EngineError::Startup(e.to_string());
        docs.clone().register(&mut registry).map_err(reg_err)?;
        hydro.clone().register(&mut registry).map_err(reg_err)?;
        let mut agent = Agent::new(parts.chat, Arc::new(registry)).with_max_rounds(config.max_rounds).with_temperature(config.chat.temperature);
        if let Some(p) = &config.system_prompt {
            agent = agent.with_system_prompt(p.clone());
        }
        let store = match &config.data_dir {
            Some(d) => SessionStore::on_disk(d, clock.clone())?,
            None => SessionStore::in_memory(clock.clone()),
        };
        Ok(Self {
            config,
            clock,
            agent: Arc::new(agent),
            store,
            hydro,
            docs,
            embedder: parts.embedder,
            judge: parts.judge,
            eval_token: parts.eval_token,
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn agent(&self) -> &Arc<Agent> {
        &self.agent
    }

    pub fn hydro(&self) -> &Arc<HydroTools> {
        &self.hydro
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.store
    }

    pub fn create_session(&self, requested_id: Option<&str>) -> Result<SessionInfo, EngineError> {
        let s = match requested_id {
            Some(id) => self.store.create_with_id(id)?,
            None => self.store.create()?,
        };
        Ok(SessionInfo { session_id: s.id().to_owned(), created_at: s.created_at().to_owned() })
    }

    pub fn send_message(&self, session_id: &str, text: &str, option: Option<&str>) -> Result<Answer, EngineError> {
        let session = self.store.get(session_id)?;
        if text.trim().is_empty() {
            return Err(EngineError::EmptyMessage);
        }
        let hint = match option {
            Some(o) => Some(option_hint(o).ok_or_else(|| EngineError::UnknownOption(o.to_owned()))?),
            None => None,
        };
        Ok(self.agent.run_turn_with_hint(&session, text, hint)?)
    }

    pub fn transcript(&self, session_id: &str) -> Result<Transcript, EngineError> {
        Ok(self.store.get(session_id)?.transcript())
    }

    pub fn export(&self, session_id: &str, format: &str) -> Result<(ExportFormat, Vec<u8>), EngineError> {
        let session = self.store.get(session_id)?;
        let format: ExportFormat = format.parse()?;
        Ok((format, export_answer(&session, format)?))
    }

    pub fn tools(&self) -> Vec<ToolDescriptor> {
        self.agent.registry().descriptors()
    }

    pub fn options(&self) -> &'static [StarterOption] {
        &STARTER_OPTIONS
    }

    pub fn health(&self) -> Health {
        let ds = self.hydro.snapshot();
        Health {
            status: "ok".into(),
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            chat_provider: self.agent.provider_name().into(),
            tools: self.agent.registry().len(),
            index: self.docs.index().stats(),
            dataset: DatasetStats {
                dataset_id: ds.dataset_id().to_owned(),
                stations: ds.station_count(),
                points: ds.point_count(),
                eflow_thresholds: ds.thresholds().len(),
            },
        }
    }

    pub fn check_eval_token(&self, presented: Option<&str>) -> Result<(), EngineError> {
        let Some(expected) = &self.eval_token else {
            return Err(EngineError::EvalDisabled);
        };
        match presented {
            Some(p) if constant_time_eq(p.as_bytes(), expected.as_bytes()) => Ok(()),
            _ => Err(EngineError::Unauthorized),
        }
    }

    /// Runs the evaluation dataset through this engine's agent, one fresh
    /// in-memory session per question.
    pub fn run_eval(&self, token: Option<&str>, dataset: &Path) -> Result<MetricReport, EngineError> {
        self.check_eval_token(token)?;
        let samples = load_eval_dataset(dataset)?;
        Ok(self.evaluate(&samples))
    }

    /// Scores samples against this engine's agent with the configured judge
    /// and embedder. No token check; the CLI calls this directly.
    pub fn evaluate(&self, samples: &[EvalSample]) -> MetricReport {
        let sut = AgentSut::new(self.agent.clone(), self.clock.clone());
        run_evaluation(samples, &sut, self.judge.as_ref(), self.embedder.as_ref(), self.config.eval.n_questions)
    }
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}
