//! Shared helpers for the integration tests: a generated fixture workspace
//! and brute-force oracles that recompute results from raw inputs without
//! going through the library code under test.

#![allow(dead_code)]

pub mod oracle;
pub mod random;
pub mod conversations;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use basin_copilot::fixtures;
use basin_copilot::gateway::{Config, Engine, EngineParts};
use basin_copilot::hydro::{load_dataset, Datasets};
use basin_copilot::index::VectorIndex;
use basin_copilot::ingest::{ingest_corpus, ChunkConfig};
use basin_copilot::provider::{ChatProvider, Embedder, MockEmbedder, RuleJudge};

pub const FIXED_CLOCK: &str = "2025-01-15T08:00:00Z";

/// Fixtures for one seed plus a built index, in a temporary directory.
pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new(seed: u64) -> Self {
        let dir = tempfile::tempdir().expect("tempdir");
        fixtures::write_fixtures(dir.path(), seed).expect("write fixtures");
        let embedder = MockEmbedder::default();
        let embedded = ingest_corpus(&dir.path().join("corpus/corpus.json"), ChunkConfig::default(), &embedder).expect("ingest");
        let mut index = VectorIndex::new(embedder.dimension(), embedder.model_id());
        index.upsert(embedded).expect("upsert");
        index.save(&dir.path().join("index.bcvx")).expect("save index");
        Self { dir }
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn file(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn datasets(&self) -> Datasets {
        load_dataset(&self.file("dataset.json")).expect("load dataset")
    }

    pub fn index(&self) -> VectorIndex {
        VectorIndex::load(&self.file("index.bcvx")).expect("load index")
    }

    pub fn config(&self) -> Config {
        let mut cfg = Config::new(self.file("index.bcvx"), Some(self.file("dataset.json")));
        cfg.fixed_clock = Some(FIXED_CLOCK.into());
        cfg
    }

    /// Engine over these fixtures with the given chat provider and mock
    /// embedder and judge.
    pub fn engine(&self, chat: Arc<dyn ChatProvider>, eval_token: Option<&str>) -> Engine {
        self.engine_with(self.config(), chat, eval_token)
    }

    pub fn engine_with(&self, config: Config, chat: Arc<dyn ChatProvider>, eval_token: Option<&str>) -> Engine {
        Engine::assemble(
            config,
            EngineParts {
                index: self.index(),
                datasets: self.datasets(),
                chat,
                embedder: Arc::new(MockEmbedder::default()),
                judge: Arc::new(RuleJudge),
                eval_token: eval_token.map(str::to_owned),
            },
        )
        .expect("engine")
    }
}
