//! Exact cosine top-k search over embedded chunks, with metadata filters and
//! a single-file persistent format.

mod filter;
mod persist;

pub use filter::{DateRange, MetadataFilter};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ingest::{Chunk, EmbeddedChunk};
use crate::source::SourceRef;

pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("dimension mismatch: index has {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding model mismatch: index uses `{expected}`, got `{got}`")]
    ModelMismatch { expected: String, got: String },
    #[error("k must be positive")]
    InvalidK,
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("corrupt index file: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone)]
struct Entry {
    chunk: Chunk,
    vector: Vec<f32>,
    norm: f64,
}

impl Entry {
    fn new(chunk: Chunk, vector: Vec<f32>) -> Self {
        let norm = vector.iter().map(|x| f64::from(*x) * f64::from(*x)).sum::<f64>().sqrt();
        Self { chunk, vector, norm }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub chunk_id: String,
    pub score: f64,
    pub snippet: String,
    pub source: SourceRef,
}

/// Vectors are stored as `f32`; scores are computed in `f64` as
/// `dot(q, v) / (|q| |v|)`, and are 0 whenever either side is all zeros.
#[derive(Debug, Clone)]
pub struct VectorIndex {
    dimension: usize,
    embed_model_id: String,
    entries: BTreeMap<String, Entry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexStats {
    pub entries: usize,
    pub dimension: usize,
    pub embed_model_id: String,
}

impl VectorIndex {
    pub fn new(dimension: usize, embed_model_id: &str) -> Self {
        Self { dimension, embed_model_id: embed_model_id.to_owned(), entries: BTreeMap::new() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn embed_model_id(&self) -> &str {
        &self.embed_model_id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats { entries: self.len(), dimension: self.dimension, embed_model_id: self.embed_model_id.clone() }
    }

    pub fn get(&self, chunk_id: &str) -> Option<&Chunk> {
        self.entries.get(chunk_id).map(|e| &e.chunk)
    }

    pub fn chunks(&self) -> impl Iterator<Item = &Chunk> {
        self.entries.values().map(|e| &e.chunk)
    }

    /// Stored vector for `chunk_id`, widened to `f64`.
    pub fn vector(&self, chunk_id: &str) -> Option<Vec<f64>> {
        self.entries.get(chunk_id).map(|e| e.vector.iter().map(|x| f64::from(*x)).collect())
    }

    /// Inserts or replaces by chunk id. Validates the whole batch first, so a
    /// rejected batch leaves the index untouched. Returns the number written.
    pub fn upsert(&mut self, items: Vec<EmbeddedChunk>) -> Result<usize, IndexError> {
        for item in &items {
            if item.vector.len() != self.dimension {
                return Err(IndexError::DimensionMismatch { expected: self.dimension, got: item.vector.len() });
            }
            if item.embed_model_id != self.embed_model_id {
                return Err(IndexError::ModelMismatch { expected: self.embed_model_id.clone(), got: item.embed_model_id.clone() });
            }
        }
        let n = items.len();
        for item in items {
            let vector = item.vector.iter().map(|x| *x as f32).collect();
            self.entries.insert(item.chunk.chunk_id.clone(), Entry::new(item.chunk, vector));
        }
        Ok(n)
    }

    pub fn search(&self, query: &[f64], filter: &MetadataFilter, k: usize) -> Result<Vec<SearchHit>, IndexError> {
        if query.len() != self.dimension {
            return Err(IndexError::DimensionMismatch { expected: self.dimension, got: query.len() });
        }
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        filter.validate()?;
        let qnorm = query.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut scored: Vec<(f64, &Entry)> = self
            .entries
            .values()
            .filter(|e| filter.matches(&e.chunk.metadata))
            .map(|e| {
                let score = if qnorm == 0.0 || e.norm == 0.0 {
                    0.0
                } else {
                    let dot: f64 = query.iter().zip(&e.vector).map(|(q, v)| q * f64::from(*v)).sum();
                    (dot / (qnorm * e.norm)).clamp(-1.0, 1.0)
                };
                // Adding +0.0 folds -0.0 into +0.0, which total_cmp would
                // otherwise rank below an equal +0.0 and break the tie order.
                (score + 0.0, e)
            })
            .collect();
        // Entries iterate in chunk_id order and the sort is stable, so equal
        // scores keep ascending chunk_id order.
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(score, e)| SearchHit {
                chunk_id: e.chunk.chunk_id.clone(),
                score,
                snippet: e.chunk.text.clone(),
                source: SourceRef::Document {
                    doc_id: e.chunk.doc_id.clone(),
                    title: e.chunk.metadata.title.clone(),
                    chunk_id: e.chunk.chunk_id.clone(),
                    char_span: e.chunk.char_span,
                },
            })
            .collect())
    }
}
