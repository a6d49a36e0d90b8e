//! `search_documents`: semantic search over the chunk index, returning
//! snippets with document references.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::agent::{Args, RegistryError, ToolError, ToolRegistry};
use crate::index::{IndexError, MetadataFilter, VectorIndex, DEFAULT_TOP_K};
use crate::protocol::{ParamSpec, ParamType, Table, ToolDescriptor, ToolResult};
use crate::provider::{Embedder, ProviderError};
use crate::source::SourceRef;

pub const TOOL_NAME: &str = "search_documents";
pub const NO_MATCHES: &str = "no matching documents";

#[derive(Debug, thiserror::Error)]
pub enum DocSearchError {
    #[error("query embedder `{query}` differs from index embedder `{index}`")]
    ModelMismatch { index: String, query: String },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snippet {
    pub text: String,
    pub source: SourceRef,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocSearchResult {
    pub snippets: Vec<Snippet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

pub struct DocSearch {
    index: Arc<VectorIndex>,
    embedder: Arc<dyn Embedder>,
    default_k: usize,
}

impl DocSearch {
    pub fn new(index: Arc<VectorIndex>, embedder: Arc<dyn Embedder>) -> Self {
        Self { index, embedder, default_k: DEFAULT_TOP_K }
    }

    pub fn with_default_k(mut self, k: usize) -> Self {
        self.default_k = k;
        self
    }

    pub fn index(&self) -> &VectorIndex {
        &self.index
    }

    pub fn search(&self, query: &str, filter: &MetadataFilter, k: Option<usize>) -> Result<DocSearchResult, DocSearchError> {
        if self.embedder.model_id() != self.index.embed_model_id() {
            return Err(DocSearchError::ModelMismatch {
                index: self.index.embed_model_id().to_owned(),
                query: self.embedder.model_id().to_owned(),
            });
        }
        let vector = self
            .embedder
            .embed(&[query.to_owned()])?
            .pop()
            .ok_or_else(|| ProviderError::Malformed("embedder returned no vector".into()))?;
        let hits = self.index.search(&vector, filter, k.unwrap_or(self.default_k))?;
        let snippets: Vec<Snippet> =
            hits.into_iter().map(|h| Snippet { text: h.snippet, source: h.source, score: h.score }).collect();
        let message = snippets.is_empty().then(|| NO_MATCHES.to_owned());
        Ok(DocSearchResult { snippets, message })
    }

    pub fn descriptor() -> ToolDescriptor {
        ToolDescriptor::new(
            TOOL_NAME,
            "Semantic search over the indexed basin document library (policy reports, hydrological model reports, \
             environmental-flow assessments). Returns the most relevant passages with their source references.",
            vec![
                ParamSpec::required("query", ParamType::String, "Natural-language search query."),
                ParamSpec::optional(
                    "filter",
                    ParamType::Object,
                    "Optional metadata filter: {doc_type_in: [policy_report|hydrological_model|eflow_assessment|other], \
                     date_range: {from: YYYY-MM-DD, to: YYYY-MM-DD}, tags_any: [..], doc_id_in: [..]}.",
                ),
                ParamSpec::optional("k", ParamType::Integer, "Maximum number of passages to return (default 5)."),
            ],
        )
    }

    fn handle(&self, args: &Args) -> Result<ToolResult, ToolError> {
        let query = args
            .get("query")
            .and_then(Value::as_str)
            .ok_or_else(|| ToolError::invalid_argument("`query` must be a string"))?;
        let filter: MetadataFilter = match args.get("filter") {
            None | Some(Value::Null) => MetadataFilter::default(),
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| ToolError::new("invalid_filter", e.to_string()))?,
        };
        let k = match args.get("k") {
            None | Some(Value::Null) => None,
            Some(v) => match v.as_u64() {
                Some(k) if k > 0 => Some(k as usize),
                _ => return Err(ToolError::invalid_argument("`k` must be a positive integer")),
            },
        };
        let result = self.search(query, &filter, k).map_err(|e| match e {
            DocSearchError::ModelMismatch { .. } => ToolError::new("model_mismatch", e.to_string()),
            DocSearchError::Index(IndexError::InvalidFilter(m)) => ToolError::new("invalid_filter", m),
            other => ToolError::new("search_failed", other.to_string()),
        })?;
        let refs = result.snippets.iter().map(|s| s.source.clone()).collect();
        let table = Table {
            columns: vec!["rank".into(), "score".into(), "source".into(), "text".into()],
            rows: result
                .snippets
                .iter()
                .enumerate()
                .map(|(i, s)| vec![(i + 1).to_string(), format!("{:.4}", s.score), s.source.describe(), s.text.clone()])
                .collect(),
        };
        let content = serde_json::to_value(&result).unwrap_or_else(|_| json!({}));
        let out = ToolResult::ok(content, refs);
        Ok(if result.snippets.is_empty() { out } else { out.with_table(table) })
    }

    pub fn register(self: Arc<Self>, registry: &mut ToolRegistry) -> Result<(), RegistryError> {
        registry.register(Self::descriptor(), Arc::new(move |args: &Args| self.handle(args)))
    }
}
