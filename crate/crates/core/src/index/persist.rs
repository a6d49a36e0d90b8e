//! Index file layout, all integers little-endian:
//!
//! ```text
//! magic     4 bytes  "BCVX"
//! version   u32      1
//! dimension u32
//! count     u64
//! meta_len  u64
//! meta      meta_len bytes of JSON {"embed_model_id": .., "chunks": [..]} in chunk_id order
//! vectors   count * dimension f32, same order as chunks
//! crc32     u32 over every preceding byte
//! ```

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Entry, IndexError, VectorIndex};
use crate::ingest::Chunk;

const MAGIC: &[u8; 4] = b"BCVX";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

#[derive(Serialize, Deserialize)]
struct Meta {
    embed_model_id: String,
    chunks: Vec<Chunk>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IndexError + '_ {
    move |source| IndexError::Io { path: path.display().to_string(), source }
}

fn corrupt(msg: impl Into<String>) -> IndexError {
    IndexError::Corrupt(msg.into())
}

impl VectorIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let meta = Meta {
            embed_model_id: self.embed_model_id.clone(),
            chunks: self.entries.values().map(|e| e.chunk.clone()).collect(),
        };
        let meta = serde_json::to_vec(&meta).expect("chunk metadata serializes");
        let mut buf = Vec::with_capacity(HEADER_LEN + meta.len() + self.len() * self.dimension * 4 + 4);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.dimension as u32).to_le_bytes());
        buf.extend_from_slice(&(self.len() as u64).to_le_bytes());
        buf.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        buf.extend_from_slice(&meta);
        for e in self.entries.values() {
            for x in &e.vector {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        if bytes.len() < HEADER_LEN + 4 {
            return Err(corrupt(format!("file too short ({} bytes)", bytes.len())));
        }
        let (body, crc) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(crc.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != stored {
            return Err(corrupt("checksum mismatch"));
        }
        if &body[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(body[o..o + 4].try_into().expect("4 bytes"));
        let u64_at = |o: usize| u64::from_le_bytes(body[o..o + 8].try_into().expect("8 bytes"));
        let version = u32_at(4);
        if version != VERSION {
            return Err(corrupt(format!("unsupported version {version}")));
        }
        let dimension = u32_at(8) as usize;
        let count = usize::try_from(u64_at(12)).map_err(|_| corrupt("count overflow"))?;
        let meta_len = usize::try_from(u64_at(20)).map_err(|_| corrupt("meta length overflow"))?;
        let vec_bytes = count.checked_mul(dimension).and_then(|n| n.checked_mul(4)).ok_or_else(|| corrupt("size overflow"))?;
        if HEADER_LEN.checked_add(meta_len).and_then(|n| n.checked_add(vec_bytes)) != Some(body.len()) {
            return Err(corrupt("section lengths disagree with file size"));
        }
        let meta: Meta = serde_json::from_slice(&body[HEADER_LEN..HEADER_LEN + meta_len])
            .map_err(|e| corrupt(format!("metadata block: {e}")))?;
        if meta.chunks.len() != count {
            return Err(corrupt("chunk count disagrees with header"));
        }
        let mut index = VectorIndex::new(dimension, &meta.embed_model_id);
        let mut floats = body[HEADER_LEN + meta_len..]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")));
        for chunk in meta.chunks {
            let vector: Vec<f32> = floats.by_ref().take(dimension).collect();
            let id = chunk.chunk_id.clone();
            if index.entries.insert(id.clone(), Entry::new(chunk, vector)).is_some() {
                return Err(corrupt(format!("duplicate chunk id `{id}`")));
            }
        }
        Ok(index)
    }

    /// Writes to a sibling temp file and renames it over `path`.
    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = std::fs::File::create(&tmp).map_err(io_err(&tmp))?;
            f.write_all(&self.to_bytes()).map_err(io_err(&tmp))?;
            f.sync_all().map_err(io_err(&tmp))?;
        }
        std::fs::rename(&tmp, path).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let bytes = std::fs::read(path).map_err(io_err(path))?;
        Self::from_bytes(&bytes)
    }
}
