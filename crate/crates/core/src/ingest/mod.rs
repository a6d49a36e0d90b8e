//! Turns source documents into embedded, metadata-tagged chunks.

mod chunk;
mod document;
mod manifest;

pub use chunk::{chunk_text, generate_metadata, Chunk, ChunkConfig, ChunkMetadata};
pub use document::{parse_document, DocType, DocumentMeta, SourceDocument, TextFormat};
pub use manifest::{load_corpus, read_chunk_dump, write_chunk_dump, ManifestEntry};

use serde::{Deserialize, Serialize};

use crate::provider::{l2_normalize, Embedder, ProviderError};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("document is not valid UTF-8: {0}")]
    InvalidEncoding(#[from] std::str::Utf8Error),
    #[error("document `{0}` has no non-whitespace content")]
    EmptyDocument(String),
    #[error("document id must be non-empty")]
    MissingDocId,
    #[error("duplicate document id `{0}`")]
    DuplicateDocId(String),
    #[error("chunk {0} has empty text")]
    EmptyChunk(usize),
    #[error("embedding failed at chunk {index}: {source}")]
    Provider { index: usize, source: ProviderError },
    #[error("embedder returned {got} vectors for {expected} texts")]
    VectorCount { expected: usize, got: usize },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedChunk {
    pub chunk: Chunk,
    pub vector: Vec<f64>,
    pub embed_model_id: String,
}

pub const EMBED_BATCH: usize = 32;

/// Embeds chunks in input order, in batches of [`EMBED_BATCH`], and
/// L2-normalizes every vector. A failing batch is reported at the index of
/// its first chunk.
pub fn embed_corpus(chunks: &[Chunk], embedder: &dyn Embedder) -> Result<Vec<EmbeddedChunk>, IngestError> {
    if let Some(i) = chunks.iter().position(|c| c.text.is_empty()) {
        return Err(IngestError::EmptyChunk(i));
    }
    let mut out = Vec::with_capacity(chunks.len());
    for (b, batch) in chunks.chunks(EMBED_BATCH).enumerate() {
        let texts: Vec<String> = batch.iter().map(|c| c.text.clone()).collect();
        let vectors = embedder
            .embed(&texts)
            .map_err(|source| IngestError::Provider { index: b * EMBED_BATCH, source })?;
        if vectors.len() != batch.len() {
            return Err(IngestError::VectorCount { expected: batch.len(), got: vectors.len() });
        }
        for (chunk, mut vector) in batch.iter().zip(vectors) {
            l2_normalize(&mut vector);
            out.push(EmbeddedChunk { chunk: chunk.clone(), vector, embed_model_id: embedder.model_id().to_owned() });
        }
    }
    Ok(out)
}

/// Loads a manifest, chunks every document and embeds the chunks.
pub fn ingest_corpus(manifest: &std::path::Path, cfg: ChunkConfig, embedder: &dyn Embedder) -> Result<Vec<EmbeddedChunk>, IngestError> {
    cfg.validate().map_err(IngestError::Manifest)?;
    let chunks: Vec<Chunk> = load_corpus(manifest)?.iter().flat_map(|d| chunk_text(d, cfg)).collect();
    embed_corpus(&chunks, embedder)
}
