//! Brute-force reference computations. Everything here works from raw CSV
//! lines, plain vectors and strings, re-deriving each rule by hand.

use std::collections::BTreeSet;
use std::path::Path;

use basin_copilot::index::MetadataFilter;
use basin_copilot::ingest::ChunkMetadata;

// ---------------------------------------------------------------------------
// Raw CSV rows

#[derive(Debug, Clone)]
pub struct RawStation {
    pub id: String,
    pub name: String,
    pub river: String,
    pub lat: f64,
    pub lon: f64,
    pub kind: String,
}

#[derive(Debug, Clone)]
pub struct RawPoint {
    pub station: String,
    pub date: String,
    pub kind: String,
    pub value: Option<f64>,
    pub quality: String,
}

impl RawPoint {
    pub fn year(&self) -> i32 {
        self.date[0..4].parse().unwrap()
    }

    pub fn month(&self) -> u32 {
        self.date[5..7].parse().unwrap()
    }
}

#[derive(Debug, Clone)]
pub struct RawThreshold {
    pub site: String,
    pub warning: f64,
    pub critical: f64,
}

pub struct Raw {
    pub stations: Vec<RawStation>,
    pub points: Vec<RawPoint>,
    pub thresholds: Vec<RawThreshold>,
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

pub fn read_raw(dir: &Path) -> Raw {
    let stations = rows(&dir.join("stations.csv"))
        .into_iter()
        .map(|r| RawStation { id: r[0].clone(), name: r[1].clone(), river: r[2].clone(), lat: r[4].parse().unwrap(), lon: r[5].parse().unwrap(), kind: r[6].clone() })
        .collect();
    let points = rows(&dir.join("series.csv"))
        .into_iter()
        .map(|r| RawPoint {
            station: r[0].clone(),
            date: r[1].clone(),
            kind: r[2].clone(),
            value: if r[3].is_empty() { None } else { Some(r[3].parse().unwrap()) },
            quality: r[5].clone(),
        })
        .collect();
    let thresholds = rows(&dir.join("thresholds.csv"))
        .into_iter()
        .map(|r| RawThreshold { site: r[0].clone(), warning: r[1].parse().unwrap(), critical: r[2].parse().unwrap() })
        .collect();
    Raw { stations, points, thresholds }
}

// ---------------------------------------------------------------------------
// Hydrology

/// (min, max, avg, total, n) over observed values of one month.
pub type MonthRow = (Option<f64>, Option<f64>, Option<f64>, f64, usize);

pub fn monthly(raw: &Raw, station: &str, year: i32) -> Vec<MonthRow> {
    (1..=12)
        .map(|m| {
            let vals: Vec<f64> = raw
                .points
                .iter()
                .filter(|p| p.station == station && p.kind == "rainfall" && p.quality == "observed" && p.year() == year && p.month() == m)
                .map(|p| p.value.unwrap())
                .collect();
            if vals.is_empty() {
                return (None, None, None, 0.0, 0);
            }
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let mut total = 0.0;
            for v in &vals {
                min = min.min(*v);
                max = max.max(*v);
                total += v;
            }
            (Some(min), Some(max), Some(total / vals.len() as f64), total, vals.len())
        })
        .collect()
}

/// Per-month total(year_a) - total(year_b).
pub fn deltas(raw: &Raw, station: &str, year_a: i32, year_b: i32) -> Vec<f64> {
    let a = monthly(raw, station, year_a);
    let b = monthly(raw, station, year_b);
    a.iter().zip(&b).map(|(x, y)| x.3 - y.3).collect()
}

/// Great-circle distance via the atan2 form of the haversine formula.
pub fn great_circle_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let r = 6371.0;
    let rad = std::f64::consts::PI / 180.0;
    let h = ((lat2 - lat1) * rad / 2.0).sin().powi(2) + (lat1 * rad).cos() * (lat2 * rad).cos() * ((lon2 - lon1) * rad / 2.0).sin().powi(2);
    2.0 * r * h.sqrt().atan2((1.0 - h).sqrt())
}

/// Ids and distances of the `n` closest stations of `kind` (any kind when None).
pub fn nearest(raw: &Raw, lat: f64, lon: f64, n: usize, kind: Option<&str>) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = raw
        .stations
        .iter()
        .filter(|s| kind.is_none_or(|k| s.kind == k))
        .map(|s| (s.id.clone(), great_circle_km(lat, lon, s.lat, s.lon)))
        .collect();
    // Selection sort: repeatedly take the smallest (distance, id).
    let mut out = Vec::new();
    while out.len() < n && !all.is_empty() {
        let mut best = 0;
        for i in 1..all.len() {
            let (ref id, d) = all[i];
            let (ref bid, bd) = all[best];
            if d < bd || (d == bd && id < bid) {
                best = i;
            }
        }
        out.push(all.remove(best));
    }
    out
}

pub fn river_centroid(raw: &Raw, river: &str) -> (f64, f64) {
    let on: Vec<&RawStation> = raw.stations.iter().filter(|s| s.river == river).collect();
    let n = on.len() as f64;
    (on.iter().map(|s| s.lat).sum::<f64>() / n, on.iter().map(|s| s.lon).sum::<f64>() / n)
}

/// Sum of the last matching-quality storage value of the month over the
/// river's reservoirs, with the contributing station ids. None when no
/// reservoir reported.
pub fn availability(raw: &Raw, river: &str, year: i32, month: u32, quality: &str) -> Option<(f64, Vec<String>)> {
    let mut total = 0.0;
    let mut ids = Vec::new();
    for st in raw.stations.iter().filter(|s| s.river == river && s.kind == "reservoir") {
        let mut last: Option<&RawPoint> = None;
        for p in &raw.points {
            if p.station == st.id && p.kind == "storage" && p.quality == quality && p.value.is_some() && p.year() == year && p.month() == month
                && last.is_none_or(|l| p.date > l.date) {
                    last = Some(p);
                }
        }
        if let Some(p) = last {
            total += p.value.unwrap();
            ids.push(st.id.clone());
        }
    }
    if ids.is_empty() {
        None
    } else {
        Some((total, ids))
    }
}

/// Most critical e-flow site of a month: highest class (critical > warning),
/// then largest relative shortfall against that class's threshold, then the
/// smallest id. None when every site is normal or has no data.
pub fn most_critical(raw: &Raw, year: i32, month: u32) -> Option<String> {
    let mut best: Option<(u8, f64, String)> = None;
    for t in &raw.thresholds {
        let flows: Vec<f64> = raw
            .points
            .iter()
            .filter(|p| p.station == t.site && p.kind == "discharge" && p.quality == "observed" && p.year() == year && p.month() == month)
            .filter_map(|p| p.value)
            .collect();
        let mut site: Option<(u8, f64)> = None;
        for f in flows {
            let (class, level) = if f < t.critical {
                (2u8, t.critical)
            } else if f < t.warning {
                (1, t.warning)
            } else {
                (0, t.warning)
            };
            let short = if level > 0.0 { (level - f) / level } else { 0.0 };
            site = match site {
                Some((c, s)) if c > class || (c == class && s >= short) => Some((c, s)),
                _ => Some((class, short)),
            };
        }
        let Some((class, short)) = site else { continue };
        if class == 0 {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bc, bs, bid)) => class > *bc || (class == *bc && (short > *bs || (short == *bs && t.site < *bid))),
        };
        if better {
            best = Some((class, short, t.site.clone()));
        }
    }
    best.map(|(_, _, id)| id)
}

// ---------------------------------------------------------------------------
// Retrieval

pub fn filter_matches(f: &MetadataFilter, m: &ChunkMetadata) -> bool {
    let type_ok = f.doc_type_in.as_ref().is_none_or(|s| s.iter().any(|t| *t == m.doc_type));
    let date_ok = match (&f.date_range, m.date) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(r), Some(d)) => !(d < r.from || d > r.to),
    };
    let tags_ok = f.tags_any.as_ref().is_none_or(|s| s.iter().any(|t| m.tags.iter().any(|u| u == t)));
    let ids_ok = f.doc_id_in.as_ref().is_none_or(|s| s.iter().any(|d| *d == m.doc_id));
    type_ok && date_ok && tags_ok && ids_ok
}

/// One stored entry as the oracle sees it: id, f32 vector, metadata.
pub struct OracleEntry {
    pub id: String,
    pub vector: Vec<f32>,
    pub meta: ChunkMetadata,
}

/// Exhaustive cosine ranking, descending score then ascending id.
pub fn exhaustive_top_k(entries: &[OracleEntry], query: &[f64], filter: &MetadataFilter, k: usize) -> Vec<(String, f64)> {
    let qn = query.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut scored: Vec<(String, f64)> = entries
        .iter()
        .filter(|e| filter_matches(filter, &e.meta))
        .map(|e| {
            let vn = e.vector.iter().map(|x| f64::from(*x) * f64::from(*x)).sum::<f64>().sqrt();
            let s = if qn == 0.0 || vn == 0.0 {
                0.0
            } else {
                let dot: f64 = query.iter().zip(&e.vector).map(|(q, v)| q * f64::from(*v)).sum();
                (dot / (qn * vn)).clamp(-1.0, 1.0)
            };
            (e.id.clone(), s)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

// ---------------------------------------------------------------------------
// Mock judge and embedder, applied by hand

const STOP: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been", "but", "by", "can", "could", "did", "do",
    "does", "for", "from", "had", "has", "have", "how", "i", "if", "in", "into", "is", "it", "its", "may", "more", "most", "no", "not",
    "of", "on", "or", "other", "our", "over", "per", "such", "than", "that", "the", "their", "them", "there", "these", "they", "this",
    "those", "to", "under", "up", "was", "we", "were", "what", "when", "where", "which", "while", "who", "why", "will", "with", "within",
    "would", "you", "your",
];

pub fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn content(text: &str) -> BTreeSet<String> {
    words(text).into_iter().filter(|w| !STOP.contains(&w.as_str())).collect()
}

pub fn sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..chars.len() {
        let end_mark = matches!(chars[i], '.' | '!' | '?');
        let boundary = i + 1 == chars.len() || chars[i + 1].is_whitespace();
        if end_mark && boundary {
            let s: String = chars[start..=i].iter().collect();
            if !s.trim().is_empty() {
                out.push(s.trim().to_owned());
            }
            start = i + 1;
        }
    }
    let tail: String = chars[start.min(chars.len())..].iter().collect();
    if !tail.trim().is_empty() {
        out.push(tail.trim().to_owned());
    }
    out
}

fn supported(statement: &str, context: &str) -> bool {
    let s = words(statement);
    let c = words(context);
    !s.is_empty() && c.windows(s.len()).any(|w| w == s.as_slice())
}

fn relevant(chunk: &str, reference: &str) -> bool {
    content(chunk).intersection(&content(reference)).count() >= 3
}

fn fnv(s: &str) -> u64 {
    let mut h: u64 = 14695981039346656037;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(1099511628211);
    }
    h
}

pub fn embed(text: &str, d: usize) -> Vec<f64> {
    let mut v = vec![0.0f64; d];
    for w in words(text) {
        let h = fnv(&w);
        let bucket = (h % d as u64) as usize;
        v[bucket] += if (h / d as u64) % 2 == 1 { -1.0 } else { 1.0 };
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

fn fraction_supported(text: &str, contexts: &[String]) -> Option<f64> {
    let st = sentences(text);
    if st.is_empty() {
        return None;
    }
    let ctx = contexts.join("\n\n");
    Some(st.iter().filter(|s| supported(s, &ctx)).count() as f64 / st.len() as f64)
}

/// [faithfulness, answer_relevancy, context_precision, context_recall,
/// ground_truth_similarity] under the mock rules.
pub fn eval_scores(question: &str, answer: &str, contexts: &[String], ground_truth: &str, n_questions: usize, d: usize) -> [Option<f64>; 5] {
    let faithfulness = fraction_supported(answer, contexts);
    let recall = fraction_supported(ground_truth, contexts);

    let precision = if contexts.is_empty() {
        None
    } else {
        let mut num = 0.0;
        let mut rel = 0;
        for (i, c) in contexts.iter().enumerate() {
            if relevant(c, ground_truth) {
                rel += 1;
                num += rel as f64 / (i + 1) as f64;
            }
        }
        Some(if rel == 0 { 0.0 } else { num / rel as f64 })
    };

    let relevancy = sentences(answer).first().and_then(|first| {
        let body = first.trim_end_matches(['.', '!', '?']).trim();
        if body.is_empty() || n_questions == 0 {
            return None;
        }
        let lead = if body.chars().any(|c| c.is_ascii_digit()) { "When" } else { "What" };
        let generated = format!("{lead} {body}?");
        let q = embed(question, d);
        let g = embed(&generated, d);
        let c = cos(&q, &g);
        // n identical questions: the mean of n equal cosines.
        let mean = (0..n_questions).map(|_| c).sum::<f64>() / n_questions as f64;
        Some(mean.clamp(0.0, 1.0))
    });

    let similarity = Some(cos(&embed(answer, d), &embed(ground_truth, d)).clamp(0.0, 1.0));
    [faithfulness, relevancy, precision, recall, similarity]
}

/// Harmonic mean of four positive values; 0 if any is not positive.
pub fn harmonic4(v: [f64; 4]) -> f64 {
    if v.iter().any(|x| *x <= 0.0) {
        return 0.0;
    }
    4.0 / v.iter().map(|x| 1.0 / x).sum::<f64>()
}
