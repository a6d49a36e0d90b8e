use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{DocType, SourceDocument};

/// Sizes are in characters, not bytes or tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkConfig {
    pub chunk_size: usize,
    pub overlap: usize,
    pub min_tail: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        Self { chunk_size: 1000, overlap: 200, min_tail: 200 }
    }
}

impl ChunkConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.chunk_size == 0 || self.overlap >= self.chunk_size {
            return Err(format!("need 0 <= overlap < chunk_size, got overlap={} chunk_size={}", self.overlap, self.chunk_size));
        }
        if self.min_tail > self.chunk_size {
            return Err(format!("min_tail {} exceeds chunk_size {}", self.min_tail, self.chunk_size));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkMetadata {
    pub doc_id: String,
    pub chunk_id: String,
    pub title: String,
    pub doc_type: DocType,
    pub date: Option<NaiveDate>,
    pub tags: BTreeSet<String>,
    pub char_span: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub ordinal: usize,
    pub text: String,
    /// `[start, end)` character offsets into the document body.
    pub char_span: [usize; 2],
    pub metadata: ChunkMetadata,
}

pub fn chunk_id(doc_id: &str, ordinal: usize) -> String {
    format!("{doc_id}#{ordinal}")
}

fn metadata_for(doc: &SourceDocument, ordinal: usize, span: [usize; 2]) -> ChunkMetadata {
    ChunkMetadata {
        doc_id: doc.doc_id.clone(),
        chunk_id: chunk_id(&doc.doc_id, ordinal),
        title: doc.title.clone(),
        doc_type: doc.doc_type,
        date: doc.date,
        tags: doc.tags.clone(),
        char_span: span,
    }
}

pub fn generate_metadata(doc: &SourceDocument, chunk: &Chunk) -> ChunkMetadata {
    debug_assert_eq!(chunk.doc_id, doc.doc_id);
    metadata_for(doc, chunk.ordinal, chunk.char_span)
}

/// Window spans over a body of `chars`.
///
/// Each window is `chunk_size` long. If the window does not reach the end of
/// the body, its end snaps back to the last paragraph break (`"\n\n"`, end
/// placed after the break) lying in the window's final 20%. The next window
/// starts `overlap` characters before the previous end. A final window shorter
/// than `min_tail` is folded into its predecessor.
pub(crate) fn window_spans(chars: &[char], cfg: ChunkConfig) -> Vec<[usize; 2]> {
    let n = chars.len();
    let mut spans: Vec<[usize; 2]> = Vec::new();
    if n == 0 {
        return spans;
    }
    let mut start = 0;
    loop {
        let mut end = (start + cfg.chunk_size).min(n);
        if end < n {
            let lo = (end - cfg.chunk_size / 5).max(start + cfg.overlap + 1).max(2);
            if let Some(b) = (lo..=end).rev().find(|&b| chars[b - 2] == '\n' && chars[b - 1] == '\n') {
                end = b;
            }
        }
        spans.push([start, end]);
        if end >= n {
            break;
        }
        start = end - cfg.overlap;
    }
    if spans.len() > 1 {
        let [s, e] = spans[spans.len() - 1];
        if e - s < cfg.min_tail {
            spans.pop();
            if let Some(prev) = spans.last_mut() {
                prev[1] = e;
            }
        }
    }
    spans
}

/// Panics if `cfg` violates its preconditions; see [`ChunkConfig::validate`].
pub fn chunk_text(doc: &SourceDocument, cfg: ChunkConfig) -> Vec<Chunk> {
    if let Err(e) = cfg.validate() {
        panic!("invalid chunk config: {e}");
    }
    let chars: Vec<char> = doc.body.chars().collect();
    window_spans(&chars, cfg)
        .into_iter()
        .enumerate()
        .map(|(ordinal, span)| Chunk {
            chunk_id: chunk_id(&doc.doc_id, ordinal),
            doc_id: doc.doc_id.clone(),
            ordinal,
            text: chars[span[0]..span[1]].iter().collect(),
            char_span: span,
            metadata: metadata_for(doc, ordinal, span),
        })
        .collect()
}
