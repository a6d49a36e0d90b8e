//! Deterministic synthetic basin: stations, daily series, e-flow thresholds,
//! a small document corpus and a 30-question evaluation set. Everything is
//! generated from one seed and is byte-identical across runs. None of it is
//! real monitoring data.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::eval::{EvalSample, Level};
use crate::hydro::MONTH_LABELS;
use crate::ingest::{DocType, ManifestEntry};

pub const DEFAULT_SEED: u64 = 42;
pub const N_DOCS: usize = 20;
pub const SAMPLES_PER_LEVEL: usize = 10;
pub const FIRST_YEAR: i32 = 2023;
pub const LAST_YEAR: i32 = 2024;
pub const FORECAST_YEAR: i32 = 2025;

/// Generated files keyed by path relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureSet {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl FixtureSet {
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, bytes)?;
        }
        Ok(())
    }

    pub fn get(&self, rel: &str) -> Option<&[u8]> {
        self.files.get(rel).map(Vec::as_slice)
    }
}

struct River {
    name: &'static str,
    country: &'static str,
    lat: f64,
    lon: f64,
}

const RIVERS: [River; 5] = [
    River { name: "Limpopo", country: "ZA", lat: -22.4, lon: 29.9 },
    River { name: "Olifants", country: "ZA", lat: -24.2, lon: 30.6 },
    River { name: "Luvuvhu", country: "ZA", lat: -22.8, lon: 30.9 },
    River { name: "Crocodile", country: "ZA", lat: -25.0, lon: 27.6 },
    River { name: "Shashe", country: "BW", lat: -21.6, lon: 27.9 },
];

const PLACE_NAMES: [&str; 24] = [
    "Mokopane", "Thabazimbi", "Makhado", "Tshipise", "Giyani", "Phalaborwa", "Marble Hall", "Loskop", "Witbank", "Hartbeespoort",
    "Brits", "Francistown", "Tati", "Mutale", "Thohoyandou", "Pafuri", "Mapungubwe", "Beitbridge", "Musina", "Alldays",
    "Tzaneen", "Hoedspruit", "Groblersdal", "Lephalale",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Rainfall,
    Discharge,
    Reservoir,
    Eflow,
}

impl Kind {
    fn as_str(self) -> &'static str {
        match self {
            Kind::Rainfall => "rainfall",
            Kind::Discharge => "discharge",
            Kind::Reservoir => "reservoir",
            Kind::Eflow => "eflow_site",
        }
    }
}

struct Station {
    id: String,
    name: String,
    river: usize,
    lat: f64,
    lon: f64,
    kind: Kind,
    /// Rain scale, base flow (m3/s) or capacity (Mm3), by kind.
    scale: f64,
}

/// (station, river index, kind) layout; coordinates and scales are drawn.
const LAYOUT: [(&str, usize, Kind); 22] = [
    ("R01", 0, Kind::Rainfall),
    ("R02", 1, Kind::Rainfall),
    ("R03", 1, Kind::Rainfall),
    ("R04", 2, Kind::Rainfall),
    ("R05", 3, Kind::Rainfall),
    ("R06", 4, Kind::Rainfall),
    ("R07", 0, Kind::Rainfall),
    ("R08", 2, Kind::Rainfall),
    ("Q01", 0, Kind::Discharge),
    ("Q02", 1, Kind::Discharge),
    ("Q03", 3, Kind::Discharge),
    ("Q04", 4, Kind::Discharge),
    ("D01", 1, Kind::Reservoir),
    ("D02", 1, Kind::Reservoir),
    ("D03", 0, Kind::Reservoir),
    ("D04", 0, Kind::Reservoir),
    ("D05", 3, Kind::Reservoir),
    ("D06", 2, Kind::Reservoir),
    ("EF01", 0, Kind::Eflow),
    ("EF02", 2, Kind::Eflow),
    ("EF03", 1, Kind::Eflow),
    ("EF04", 3, Kind::Eflow),
];

/// Site with the engineered critical breach in December of the last year.
pub const BREACH_SITE: &str = "EF02";

const WET_PROB: [f64; 12] = [0.45, 0.40, 0.35, 0.20, 0.08, 0.03, 0.02, 0.03, 0.08, 0.20, 0.35, 0.42];
const RAIN_MEAN: [f64; 12] = [12.0, 11.0, 10.0, 8.0, 6.0, 4.0, 4.0, 5.0, 7.0, 9.0, 11.0, 12.0];
const FLOW_SEASON: [f64; 12] = [3.0, 3.2, 2.6, 1.6, 1.0, 0.7, 0.55, 0.45, 0.45, 0.6, 1.1, 2.0];
const STORAGE_TREND: [f64; 12] = [0.004, 0.004, 0.003, 0.0, -0.002, -0.003, -0.003, -0.004, -0.004, -0.002, 0.001, 0.003];

fn round(v: f64, places: i32) -> f64 {
    let f = 10f64.powi(places);
    (v * f).round() / f
}

fn days(year_from: i32, year_to: i32) -> impl Iterator<Item = NaiveDate> {
    let start = NaiveDate::from_ymd_opt(year_from, 1, 1).expect("valid date");
    let end = NaiveDate::from_ymd_opt(year_to, 12, 31).expect("valid date");
    start.iter_days().take_while(move |d| *d <= end)
}

fn last_day_of_month(d: NaiveDate) -> bool {
    d.succ_opt().is_none_or(|n| n.month() != d.month())
}

struct SeriesOut {
    rows: Vec<[String; 6]>,
    /// Observed rainfall totals per (station, year, month).
    rain_totals: BTreeMap<(String, i32, u32), f64>,
}

fn gen_stations(rng: &mut ChaCha8Rng) -> Vec<Station> {
    LAYOUT
        .iter()
        .enumerate()
        .map(|(i, (id, river, kind))| {
            let r = &RIVERS[*river];
            let lat = round(r.lat + rng.gen_range(-0.6..0.6), 4);
            let lon = round(r.lon + rng.gen_range(-0.6..0.6), 4);
            let scale = match kind {
                Kind::Rainfall => round(rng.gen_range(0.7..1.3), 2),
                Kind::Discharge | Kind::Eflow => round(rng.gen_range(4.0..40.0), 1),
                Kind::Reservoir => round(rng.gen_range(40.0..400.0), 0),
            };
            let suffix = match kind {
                Kind::Rainfall => "Rain Gauge",
                Kind::Discharge => "Flow Gauge",
                Kind::Reservoir => "Dam",
                Kind::Eflow => "E-flow Site",
            };
            Station { id: (*id).into(), name: format!("{} {suffix}", PLACE_NAMES[i]), river: *river, lat, lon, kind: *kind, scale }
        })
        .collect()
}

fn thresholds(st: &Station) -> (f64, f64) {
    (round(st.scale * 0.6, 2), round(st.scale * 0.35, 2))
}

fn gen_series(rng: &mut ChaCha8Rng, stations: &[Station]) -> SeriesOut {
    let mut rows = Vec::new();
    let mut rain_totals = BTreeMap::new();
    let row = |id: &str, d: NaiveDate, kind: &str, v: Option<f64>, unit: &str, q: &str| -> [String; 6] {
        [id.into(), d.to_string(), kind.into(), v.map(|x| x.to_string()).unwrap_or_default(), unit.into(), q.into()]
    };
    for st in stations {
        match st.kind {
            Kind::Rainfall => {
                for d in days(FIRST_YEAR, LAST_YEAR) {
                    let m = d.month0() as usize;
                    let u: f64 = rng.gen();
                    if u < 0.02 {
                        rows.push(row(&st.id, d, "rainfall", None, "mm", "missing"));
                        continue;
                    }
                    let v = if rng.gen::<f64>() < WET_PROB[m] {
                        round(-(1.0 - rng.gen::<f64>()).ln() * RAIN_MEAN[m] * st.scale, 1)
                    } else {
                        0.0
                    };
                    *rain_totals.entry((st.id.clone(), d.year(), d.month())).or_insert(0.0) += v;
                    rows.push(row(&st.id, d, "rainfall", Some(v), "mm", "observed"));
                }
            }
            Kind::Discharge | Kind::Eflow => {
                let (_, critical) = thresholds(st);
                for d in days(FIRST_YEAR, LAST_YEAR) {
                    let m = d.month0() as usize;
                    if rng.gen::<f64>() < 0.01 {
                        rows.push(row(&st.id, d, "discharge", None, "m3_per_s", "missing"));
                        continue;
                    }
                    let mut v = round(st.scale * FLOW_SEASON[m] * rng.gen_range(0.8..1.2), 2);
                    if st.id == BREACH_SITE && d.year() == LAST_YEAR && d.month() == 12 && (10..=20).contains(&d.day()) {
                        v = round(critical * rng.gen_range(0.4..0.9), 2);
                    }
                    rows.push(row(&st.id, d, "discharge", Some(v), "m3_per_s", "observed"));
                }
            }
            Kind::Reservoir => {
                let mut frac: f64 = rng.gen_range(0.4..0.8);
                for d in days(FIRST_YEAR, FORECAST_YEAR) {
                    let m = d.month0() as usize;
                    frac = (frac + STORAGE_TREND[m] + rng.gen_range(-0.002..0.002)).clamp(0.05, 1.0);
                    let forecast = d.year() == FORECAST_YEAR;
                    let report = if forecast { last_day_of_month(d) } else { d.day() % 7 == 0 || last_day_of_month(d) };
                    if report {
                        let q = if forecast { "forecast" } else { "observed" };
                        rows.push(row(&st.id, d, "storage", Some(round(st.scale * frac, 1)), "Mm3", q));
                    }
                }
            }
        }
    }
    SeriesOut { rows, rain_totals }
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

/// One sentence of a document together with a question it answers.
#[derive(Clone)]
struct Fact {
    sentence: String,
    question: String,
}

struct Doc {
    doc_id: String,
    title: String,
    doc_type: DocType,
    date: String,
    tags: Vec<String>,
    paragraphs: Vec<Vec<Fact>>,
}

const FISH: [&str; 4] = ["tigerfish", "Limpopo barb", "silver robber", "bream"];

fn fact_pool(rng: &mut ChaCha8Rng, river: &River, doc_type: DocType) -> Vec<Fact> {
    let r = river.name;
    let f = |s: String, q: String| Fact { sentence: s, question: q };
    let mut facts = vec![
        f(
            format!("The {r} River drains a catchment of about {} square kilometres.", rng.gen_range(8..60) * 1000),
            format!("How large is the catchment of the {r} River?"),
        ),
        f(
            format!("Mean annual runoff in the {r} catchment was estimated at {} million cubic metres.", rng.gen_range(150..2500)),
            format!("What is the mean annual runoff of the {r} catchment?"),
        ),
        f(
            format!("Groundwater recharge across the {r} catchment averages {} millimetres per year.", rng.gen_range(5..60)),
            format!("How much groundwater recharge does the {r} catchment receive?"),
        ),
        f(
            format!("Sediment loads in the {r} River increase sharply during the first storms of the wet season."),
            format!("When do sediment loads in the {r} River increase?"),
        ),
    ];
    match doc_type {
        DocType::PolicyReport => facts.extend([
            f(
                format!("Irrigation accounts for {} percent of water withdrawals in the {r} sub-basin.", rng.gen_range(40..85)),
                format!("What share of water withdrawals in the {r} sub-basin goes to irrigation?"),
            ),
            f(
                format!("Water allocation rules in the {r} sub-basin give priority to domestic use and the ecological reserve."),
                format!("Which uses get priority in water allocation in the {r} sub-basin?"),
            ),
            f(
                format!("The policy review recommends metering of all abstractions above {} cubic metres per day.", rng.gen_range(2..20) * 50),
                "Which abstractions should be metered according to the policy review?".into(),
            ),
            f(
                format!("Transboundary cooperation on the {r} River is coordinated through the Limpopo Watercourse Commission."),
                format!("Who coordinates transboundary cooperation on the {r} River?"),
            ),
        ]),
        DocType::HydrologicalModel => facts.extend([
            f(
                format!("The model was calibrated against daily discharge from {} to {}.", 1980 + rng.gen_range(0..10), 2010 + rng.gen_range(0..12)),
                format!("Which period was the {r} hydrological model calibrated on?"),
            ),
            f(
                format!("The calibrated model reached a Nash-Sutcliffe efficiency of 0.{} at the outlet gauge.", rng.gen_range(55..90)),
                format!("How well did the {r} model perform at the outlet gauge?"),
            ),
            f(
                format!("Climate projections suggest a decline of {} percent in mean annual rainfall by 2050.", rng.gen_range(3..18)),
                format!("How is mean annual rainfall in the {r} catchment projected to change?"),
            ),
            f(
                format!("Reservoir releases on the {r} River are reviewed every {} months by the catchment agency.", rng.gen_range(2..7)),
                format!("How often are reservoir releases on the {r} River reviewed?"),
            ),
        ]),
        DocType::EflowAssessment | DocType::Other => facts.extend([
            f(
                format!("The dry season environmental flow requirement on the {r} River was set at {} cubic metres per second.", rng.gen_range(2..30)),
                format!("What is the dry season environmental flow requirement on the {r} River?"),
            ),
            f(
                format!("Flows below the critical threshold occurred in {} of the last ten dry seasons.", rng.gen_range(1..8)),
                format!("How often did {r} River flows fall below the critical threshold?"),
            ),
            f(
                format!("Fish species such as the {} depend on seasonal flooding of the {r} floodplain.", FISH[rng.gen_range(0..FISH.len())]),
                format!("Which fish depend on seasonal flooding of the {r} floodplain?"),
            ),
            f(
                format!("Riparian vegetation along the {r} River declined by {} percent between the two surveys.", rng.gen_range(5..40)),
                format!("How much did riparian vegetation along the {r} River decline?"),
            ),
        ]),
    }
    facts
}

/// Filler sentences that carry no facts; they pad paragraphs so documents
/// span several chunks.
const FILLER: [&str; 8] = [
    "Field teams collected additional observations during both the wet and the dry season.",
    "Stakeholder workshops were held with municipalities, farmers and conservation agencies.",
    "Uncertainty in the estimates is discussed in the technical appendix.",
    "Data gaps were filled only where neighbouring stations provided consistent records.",
    "The findings were reviewed by the basin technical committee before publication.",
    "All volumes are reported in metric units unless stated otherwise.",
    "Long-term monitoring remains essential for adaptive management of the basin.",
    "Results should be read together with the earlier catchment studies listed in the references.",
];

fn gen_docs(rng: &mut ChaCha8Rng) -> Vec<Doc> {
    let types = [DocType::PolicyReport, DocType::HydrologicalModel, DocType::EflowAssessment];
    (0..N_DOCS)
        .map(|i| {
            let river = &RIVERS[i % RIVERS.len()];
            let doc_type = types[i % types.len()];
            let year = 2015 + rng.gen_range(0..10);
            let month = rng.gen_range(1..=12);
            let mut pool = fact_pool(rng, river, doc_type);
            // Fisher-Yates so every document orders its facts differently.
            for k in (1..pool.len()).rev() {
                pool.swap(k, rng.gen_range(0..=k));
            }
            let n_par = rng.gen_range(3..=4);
            let mut paragraphs: Vec<Vec<Fact>> = vec![Vec::new(); n_par];
            for (k, fact) in pool.into_iter().enumerate() {
                paragraphs[k % n_par].push(fact);
            }
            for p in &mut paragraphs {
                for _ in 0..rng.gen_range(2..=4) {
                    let s = FILLER[rng.gen_range(0..FILLER.len())];
                    p.push(Fact { sentence: s.into(), question: String::new() });
                }
            }
            let kind_title = match doc_type {
                DocType::PolicyReport => "Water Governance Review",
                DocType::HydrologicalModel => "Hydrological Model Report",
                _ => "Environmental Flow Assessment",
            };
            Doc {
                doc_id: format!("doc{:02}", i + 1),
                title: format!("{} River {kind_title} {year}", river.name),
                doc_type,
                date: format!("{year:04}-{month:02}-01"),
                tags: vec![river.name.to_lowercase(), river.country.to_lowercase()],
                paragraphs,
            }
        })
        .collect()
}

fn paragraph_text(p: &[Fact]) -> String {
    p.iter().map(|f| f.sentence.as_str()).collect::<Vec<_>>().join(" ")
}

fn doc_markdown(d: &Doc) -> String {
    let mut s = format!("# {}\n\n_Synthetic document generated for testing._\n\n", d.title);
    for (i, p) in d.paragraphs.iter().enumerate() {
        s.push_str(&format!("## Section {}\n\n{}\n\n", i + 1, paragraph_text(p)));
    }
    s
}

fn facts_of(d: &Doc) -> Vec<(usize, &Fact)> {
    d.paragraphs.iter().enumerate().flat_map(|(i, p)| p.iter().filter(|f| !f.question.is_empty()).map(move |f| (i, f))).collect()
}

fn shuffle<T>(rng: &mut ChaCha8Rng, v: &mut [T]) {
    for k in (1..v.len()).rev() {
        v.swap(k, rng.gen_range(0..=k));
    }
}

/// A plausible statement absent from every context.
fn hallucination(rng: &mut ChaCha8Rng) -> String {
    let r = RIVERS[rng.gen_range(0..RIVERS.len())].name;
    match rng.gen_range(0..3) {
        0 => format!("The {r} River has {} major tributaries.", rng.gen_range(3..12)),
        1 => format!("Water tariffs in the {r} area rose by {} percent last year.", rng.gen_range(2..30)),
        _ => format!("A new desalination plant supplies the {r} valley."),
    }
}

fn gen_eval(rng: &mut ChaCha8Rng, docs: &[Doc], stations: &[Station], series: &SeriesOut) -> Vec<EvalSample> {
    let mut out = Vec::new();
    let distractor = |rng: &mut ChaCha8Rng, not: usize| -> String {
        let mut j = rng.gen_range(0..docs.len());
        if j == not {
            j = (j + 1) % docs.len();
        }
        let d = &docs[j];
        paragraph_text(&d.paragraphs[rng.gen_range(0..d.paragraphs.len())])
    };

    for i in 0..SAMPLES_PER_LEVEL {
        let di = (i * 7 + 3) % docs.len();
        let d = &docs[di];
        let facts = facts_of(d);
        let (pi, fact) = facts[rng.gen_range(0..facts.len())];
        let mut contexts = vec![paragraph_text(&d.paragraphs[pi]), distractor(rng, di)];
        shuffle(rng, &mut contexts);
        let mut answer = fact.sentence.clone();
        if rng.gen_bool(0.4) {
            answer.push(' ');
            answer.push_str(&hallucination(rng));
        }
        out.push(EvalSample {
            id: format!("L1-{:02}", i + 1),
            question: fact.question.clone(),
            contexts,
            answer,
            ground_truth: fact.sentence.clone(),
            level: Level::L1,
        });
    }

    for i in 0..SAMPLES_PER_LEVEL {
        let di = (i * 3 + 1) % docs.len();
        let d = &docs[di];
        let facts = facts_of(d);
        let a = rng.gen_range(0..facts.len());
        let mut b = rng.gen_range(0..facts.len());
        if b == a {
            b = (a + 1) % facts.len();
        }
        let (pa, fa) = facts[a];
        let (pb, fb) = facts[b];
        let mut contexts = vec![paragraph_text(&d.paragraphs[pa])];
        if pb != pa && rng.gen_bool(0.6) {
            contexts.push(paragraph_text(&d.paragraphs[pb]));
        }
        for _ in 0..rng.gen_range(0..=2) {
            contexts.push(distractor(rng, di));
        }
        shuffle(rng, &mut contexts);
        let second = if rng.gen_bool(0.7) { fb.sentence.clone() } else { hallucination(rng) };
        out.push(EvalSample {
            id: format!("L2-{:02}", i + 1),
            question: format!("{} Also, {}", fa.question, lower_first(&fb.question)),
            contexts,
            answer: format!("{} {second}", fa.sentence),
            ground_truth: format!("{} {}", fa.sentence, fb.sentence),
            level: Level::L2,
        });
    }

    let rain: Vec<&Station> = stations.iter().filter(|s| s.kind == Kind::Rainfall).collect();
    for i in 0..SAMPLES_PER_LEVEL {
        let st = rain[i % rain.len()];
        let month = rng.gen_range(1..=12u32);
        let total = series.rain_totals.get(&(st.id.clone(), LAST_YEAR, month)).copied().unwrap_or(0.0);
        let label = MONTH_LABELS[month as usize - 1];
        let truth = format!("Total rainfall at {} in {label} {LAST_YEAR} was {:.1} mm.", st.name, total);
        let prev = series.rain_totals.get(&(st.id.clone(), FIRST_YEAR, month)).copied().unwrap_or(0.0);
        let other = format!("Total rainfall at {} in {label} {FIRST_YEAR} was {:.1} mm.", st.name, prev);
        let station_line = format!("Station {} is a rainfall gauge on the {} River.", st.name, RIVERS[st.river].name);
        let contexts = match i % 5 {
            4 if i == 9 => Vec::new(),
            0 | 2 => vec![truth.clone(), other.clone(), station_line],
            1 => vec![other.clone(), truth.clone()],
            _ => vec![station_line, truth.clone()],
        };
        let answer = match rng.gen_range(0..3) {
            0 => format!("{truth} {other}"),
            1 => truth.clone(),
            _ => format!("Total rainfall at {} in {label} {LAST_YEAR} was {:.1} mm.", st.name, total + 10.0),
        };
        out.push(EvalSample {
            id: format!("L3-{:02}", i + 1),
            question: format!("What was the total rainfall at {} in {label} {LAST_YEAR}?", st.name),
            contexts,
            answer,
            ground_truth: truth,
            level: Level::L3,
        });
    }
    out
}

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

const CONFIG_TOML: &str = r#"# Offline demo configuration for the generated fixtures.
bind = "127.0.0.1:8080"
index_path = "index.bcvx"
dataset_manifest = "dataset.json"
data_dir = "sessions"
max_rounds = 8
top_k = 5

[chat]
provider = "rule"

[embedder]
provider = "mock"
dimension = 256
"#;

const SCRIPTED_CONFIG_TOML: &str = r#"# Same as config.toml, but the chat model replays script.json.
bind = "127.0.0.1:8080"
index_path = "index.bcvx"
dataset_manifest = "dataset.json"
max_rounds = 8
top_k = 5

[chat]
provider = "scripted"
script = "script.json"

[embedder]
provider = "mock"
dimension = 256
"#;

/// Generates every fixture file in memory.
pub fn generate(seed: u64) -> FixtureSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stations = gen_stations(&mut rng);
    let series = gen_series(&mut rng, &stations);
    let docs = gen_docs(&mut rng);
    let eval = gen_eval(&mut rng, &docs, &stations, &series);

    let mut files = BTreeMap::new();
    files.insert(
        "stations.csv".to_owned(),
        csv_bytes(
            &["station_id", "name", "river", "country", "lat", "lon", "kind"],
            stations.iter().map(|s| {
                let r = &RIVERS[s.river];
                [s.id.clone(), s.name.clone(), r.name.into(), r.country.into(), s.lat.to_string(), s.lon.to_string(), s.kind.as_str().into()]
            }),
        ),
    );
    files.insert("series.csv".to_owned(), csv_bytes(&["station_id", "date", "kind", "value", "unit", "quality"], series.rows.iter()));
    files.insert(
        "thresholds.csv".to_owned(),
        csv_bytes(
            &["site_id", "warning_level", "critical_level"],
            stations.iter().filter(|s| s.kind == Kind::Eflow).map(|s| {
                let (w, c) = thresholds(s);
                [s.id.clone(), w.to_string(), c.to_string()]
            }),
        ),
    );
    let dataset = json!({
        "dataset_id": "synthetic-basin",
        "note": format!("Synthetic monitoring data generated with seed {seed}; not real observations."),
        "stations": "stations.csv",
        "series": "series.csv",
        "thresholds": "thresholds.csv",
    });
    files.insert("dataset.json".to_owned(), pretty(&dataset));

    let mut manifest = Vec::new();
    for d in &docs {
        let rel = format!("corpus/{}.md", d.doc_id);
        files.insert(rel.clone(), doc_markdown(d).into_bytes());
        manifest.push(ManifestEntry {
            path: rel.strip_prefix("corpus/").expect("corpus path").into(),
            doc_id: d.doc_id.clone(),
            title: d.title.clone(),
            doc_type: d.doc_type,
            date: Some(d.date.clone()),
            tags: d.tags.clone(),
        });
    }
    files.insert("corpus/corpus.json".to_owned(), pretty(&manifest));

    let mut jsonl = String::new();
    for s in &eval {
        jsonl.push_str(&serde_json::to_string(s).expect("samples serialize"));
        jsonl.push('\n');
    }
    files.insert("eval/dataset.jsonl".to_owned(), jsonl.into_bytes());

    let first_rain = &stations.iter().find(|s| s.kind == Kind::Rainfall).expect("rain station").id;
    let script = json!([
        {"kind": "tool_calls", "tool_calls": [{"name": "search_documents", "arguments": {"query": "environmental flow requirement Luvuvhu River"}}]},
        {"kind": "tool_calls", "tool_calls": [{"name": "chart_spec", "arguments": {"tool": "monthly_rainfall", "params": {"station_id": first_rain, "year": LAST_YEAR}, "chart_kind": "bar"}}]},
        {"kind": "final_text", "text": "The documents above describe the environmental flow requirements on the Luvuvhu River, and the chart shows monthly rainfall at the nearest gauge."}
    ]);
    files.insert("script.json".to_owned(), pretty(&script));
    files.insert("config.toml".to_owned(), CONFIG_TOML.as_bytes().to_vec());
    files.insert("config.scripted.toml".to_owned(), SCRIPTED_CONFIG_TOML.as_bytes().to_vec());
    FixtureSet { files }
}

fn pretty<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("fixtures serialize");
    b.push(b'\n');
    b
}

/// Generates and writes the fixtures into `dir`.
pub fn write_fixtures(dir: &Path, seed: u64) -> std::io::Result<FixtureSet> {
    let set = generate(seed);
    set.write(dir)?;
    Ok(set)
}
