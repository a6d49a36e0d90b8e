//! Random index contents, queries and filters for the retrieval tests.

use std::collections::BTreeSet;

use basin_copilot::index::{DateRange, MetadataFilter, VectorIndex};
use basin_copilot::ingest::{Chunk, ChunkMetadata, DocType, EmbeddedChunk};
use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;

use super::oracle::OracleEntry;

const TYPES: [DocType; 4] = [DocType::PolicyReport, DocType::HydrologicalModel, DocType::EflowAssessment, DocType::Other];
const TAGS: [&str; 5] = ["limpopo", "olifants", "drought", "flood", "policy"];
pub const MODEL: &str = "test-model";

fn date(rng: &mut impl Rng) -> NaiveDate {
    NaiveDate::from_ymd_opt(rng.gen_range(2010..2025), rng.gen_range(1..=12), rng.gen_range(1..=28)).unwrap()
}

/// Components drawn from {-1, 0, 1} half of the time so exact ties and
/// duplicate vectors are common.
fn vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    if rng.gen_bool(0.5) {
        (0..dim).map(|_| f64::from(rng.gen_range(-1i8..=1))).collect()
    } else {
        (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
}

pub struct RandomIndex {
    pub index: VectorIndex,
    pub entries: Vec<OracleEntry>,
    pub dim: usize,
}

pub fn random_index(rng: &mut impl Rng, max_entries: usize) -> RandomIndex {
    let dim = rng.gen_range(2..=24);
    let n = rng.gen_range(1..=max_entries);
    let n_docs = rng.gen_range(1..=20usize.min(n));
    let pool: Vec<Vec<f64>> = (0..rng.gen_range(1..=n.min(30))).map(|_| vector(rng, dim)).collect();
    let mut items = Vec::with_capacity(n);
    for i in 0..n {
        let doc_id = format!("d{:02}", rng.gen_range(0..n_docs));
        let chunk_id = format!("{doc_id}#{i}");
        let tags: BTreeSet<String> = TAGS.iter().filter(|_| rng.gen_bool(0.3)).map(|t| t.to_string()).collect();
        let meta = ChunkMetadata {
            doc_id: doc_id.clone(),
            chunk_id: chunk_id.clone(),
            title: format!("title {doc_id}"),
            doc_type: *TYPES.choose(rng).unwrap(),
            date: rng.gen_bool(0.8).then(|| date(rng)),
            tags,
            char_span: [i, i + 10],
        };
        let v = if rng.gen_bool(0.4) { pool.choose(rng).unwrap().clone() } else { vector(rng, dim) };
        items.push(EmbeddedChunk {
            chunk: Chunk { chunk_id, doc_id, ordinal: i, text: format!("chunk {i}"), char_span: [i, i + 10], metadata: meta },
            vector: v,
            embed_model_id: MODEL.into(),
        });
    }
    let entries = items
        .iter()
        .map(|e| OracleEntry { id: e.chunk.chunk_id.clone(), vector: e.vector.iter().map(|x| *x as f32).collect(), meta: e.chunk.metadata.clone() })
        .collect();
    let mut index = VectorIndex::new(dim, MODEL);
    index.upsert(items).unwrap();
    RandomIndex { index, entries, dim }
}

pub fn random_filter(rng: &mut impl Rng, n_docs: usize) -> MetadataFilter {
    let mut f = MetadataFilter::default();
    if rng.gen_bool(0.35) {
        f.doc_type_in = Some(TYPES.iter().filter(|_| rng.gen_bool(0.5)).copied().collect());
    }
    if rng.gen_bool(0.35) {
        let (a, b) = (date(rng), date(rng));
        f.date_range = Some(DateRange { from: a.min(b), to: a.max(b) });
    }
    if rng.gen_bool(0.35) {
        f.tags_any = Some(TAGS.iter().filter(|_| rng.gen_bool(0.4)).map(|t| t.to_string()).collect());
    }
    if rng.gen_bool(0.25) {
        f.doc_id_in = Some((0..n_docs.max(1)).filter(|_| rng.gen_bool(0.5)).map(|i| format!("d{i:02}")).collect());
    }
    f
}

/// Random direction, a stored vector, or the zero vector.
pub fn random_query(rng: &mut impl Rng, r: &RandomIndex) -> Vec<f64> {
    match rng.gen_range(0..10) {
        0 => vec![0.0; r.dim],
        1..=3 => r.entries.choose(rng).unwrap().vector.iter().map(|x| f64::from(*x)).collect(),
        _ => vector(rng, r.dim),
    }
}
