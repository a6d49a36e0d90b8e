//! Retrieval-augmented, tool-calling assistant engine for river-basin water
//! resources: document indexing and semantic search, hydrology tools over
//! station datasets, an LLM tool-calling loop with source references, and a
//! four-metric RAG evaluation harness.

pub mod agent;
pub mod chart;
pub mod clock;
pub mod docsearch;
pub mod eval;
pub mod fixtures;
pub mod gateway;
pub mod hydro;
pub mod index;
pub mod ingest;
pub mod protocol;
pub mod provider;
pub mod source;
pub mod text;
