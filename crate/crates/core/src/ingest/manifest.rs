use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{parse_document, DocType, DocumentMeta, EmbeddedChunk, IngestError, SourceDocument, TextFormat};

/// One entry of the corpus manifest (a JSON array of these). `path` is
/// resolved relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub doc_id: String,
    pub title: String,
    pub doc_type: DocType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io { path: path.display().to_string(), source }
}

pub fn load_corpus(manifest: &Path) -> Result<Vec<SourceDocument>, IngestError> {
    let text = std::fs::read_to_string(manifest).map_err(io_err(manifest))?;
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(&text).map_err(|e| IngestError::Manifest(format!("{}: {e}", manifest.display())))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut seen = HashSet::new();
    let mut docs = Vec::with_capacity(entries.len());
    for e in entries {
        if !seen.insert(e.doc_id.clone()) {
            return Err(IngestError::DuplicateDocId(e.doc_id));
        }
        let path = base.join(&e.path);
        let raw = std::fs::read(&path).map_err(io_err(&path))?;
        let format = match path.extension().and_then(|x| x.to_str()) {
            Some("md") | Some("markdown") => TextFormat::Md,
            _ => TextFormat::Txt,
        };
        let meta = DocumentMeta { doc_id: e.doc_id, title: Some(e.title), doc_type: Some(e.doc_type), date: e.date, tags: e.tags };
        docs.push(parse_document(&raw, format, meta)?);
    }
    Ok(docs)
}

/// Debug dump: one JSON-encoded [`EmbeddedChunk`] per line.
pub fn write_chunk_dump(path: &Path, chunks: &[EmbeddedChunk]) -> Result<(), IngestError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = std::io::BufWriter::new(file);
    for c in chunks {
        let line = serde_json::to_string(c).map_err(|e| IngestError::Manifest(e.to_string()))?;
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_chunk_dump(path: &Path) -> Result<Vec<EmbeddedChunk>, IngestError> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| IngestError::Manifest(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{chunk_text, embed_corpus, ChunkConfig};
    use crate::provider::MockEmbedder;

    #[test]
    fn manifest_loads_and_dump_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.md"), "# A\n\nReservoir storage is high.").unwrap();
        std::fs::write(dir.path().join("b.txt"), "Rainfall was low.").unwrap();
        let manifest = serde_json::json!([
            {"path": "a.md", "doc_id": "a", "title": "Doc A", "doc_type": "policy_report", "date": "2024-01-02", "tags": ["limpopo"]},
            {"path": "b.txt", "doc_id": "b", "title": "Doc B", "doc_type": "other"}
        ]);
        let mpath = dir.path().join("corpus.json");
        std::fs::write(&mpath, manifest.to_string()).unwrap();
        let docs = load_corpus(&mpath).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].doc_type, DocType::PolicyReport);

        let chunks: Vec<_> = docs.iter().flat_map(|d| chunk_text(d, ChunkConfig::default())).collect();
        let embedded = embed_corpus(&chunks, &MockEmbedder::default()).unwrap();
        let dump = dir.path().join("chunks.jsonl");
        write_chunk_dump(&dump, &embedded).unwrap();
        assert_eq!(read_chunk_dump(&dump).unwrap(), embedded);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "x").unwrap();
        let manifest = serde_json::json!([
            {"path": "a.txt", "doc_id": "a", "title": "A", "doc_type": "other"},
            {"path": "a.txt", "doc_id": "a", "title": "A", "doc_type": "other"}
        ]);
        let mpath = dir.path().join("corpus.json");
        std::fs::write(&mpath, manifest.to_string()).unwrap();
        assert!(matches!(load_corpus(&mpath), Err(IngestError::DuplicateDocId(_))));
    }
}
