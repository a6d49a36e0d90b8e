use serde::{Deserialize, Serialize};

/// Citation handle attached to tool results and to assistant answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceRef {
    Document {
        doc_id: String,
        title: String,
        chunk_id: String,
        char_span: [usize; 2],
    },
    Dataset {
        dataset_id: String,
        query_params: serde_json::Value,
        retrieved_at: String,
    },
}

impl SourceRef {
    /// One-line human rendering used in markdown exports and the CLI.
    pub fn describe(&self) -> String {
        match self {
            SourceRef::Document { doc_id, title, char_span, .. } => {
                format!("{title} ({doc_id}, chars {}-{})", char_span[0], char_span[1])
            }
            SourceRef::Dataset { dataset_id, query_params, retrieved_at } => {
                format!("dataset {dataset_id} {query_params} (retrieved {retrieved_at})")
            }
        }
    }
}
