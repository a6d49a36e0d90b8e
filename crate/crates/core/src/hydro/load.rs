//! Dataset loading: CSV files described by a JSON manifest, or the same
//! columns fetched as JSON arrays over HTTP.
//!
//! ```text
//! stations.csv   station_id,name,river,country,lat,lon,kind
//! series.csv     station_id,date,kind,value,unit,quality
//! thresholds.csv site_id,warning_level,critical_level
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::model::{validate_station, Datasets, EflowThreshold, Quality, SeriesKind, SeriesPoint, StationKind, StationRecord, Unit};
use super::HydroError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub station_id: String,
    pub date: String,
    pub kind: SeriesKind,
    pub value: Option<f64>,
    pub unit: Unit,
    pub quality: Quality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub site_id: String,
    pub warning_level: f64,
    pub critical_level: f64,
}

/// Row position used in error messages: CSV line number (header = line 1)
/// or 1-based array position for remote payloads.
#[derive(Debug, Clone)]
pub struct RowRef {
    pub file: String,
    pub row: u64,
}

#[derive(Debug, Clone, Default)]
pub struct RawDataset {
    pub stations: Vec<(RowRef, StationRecord)>,
    pub series: Vec<(RowRef, SeriesRow)>,
    pub thresholds: Vec<(RowRef, ThresholdRow)>,
}

fn schema(at: &RowRef, message: impl Into<String>) -> HydroError {
    HydroError::Schema { file: at.file.clone(), row: at.row, message: message.into() }
}

impl Datasets {
    /// Validates rows and enforces referential integrity: every series point
    /// names a known station of a compatible kind, and every threshold names
    /// a known e-flow site.
    pub fn from_raw(dataset_id: &str, raw: RawDataset) -> Result<Self, HydroError> {
        let mut ds = Datasets { dataset_id: dataset_id.to_owned(), ..Default::default() };
        for (at, s) in raw.stations {
            validate_station(&s).map_err(|m| schema(&at, m))?;
            if ds.stations.contains_key(&s.station_id) {
                return Err(schema(&at, format!("duplicate station_id `{}`", s.station_id)));
            }
            ds.stations.insert(s.station_id.clone(), s);
        }

        let mut dangling = Vec::new();
        let mut series: BTreeMap<(String, SeriesKind), Vec<SeriesPoint>> = BTreeMap::new();
        let mut seen = HashSet::new();
        for (at, r) in raw.series {
            let date = NaiveDate::parse_from_str(r.date.trim(), "%Y-%m-%d")
                .map_err(|_| schema(&at, format!("malformed date `{}`", r.date)))?;
            if r.unit != r.kind.unit() {
                return Err(schema(&at, format!("unit {} does not match series kind {:?}", r.unit.as_str(), r.kind)));
            }
            match (r.quality, r.value) {
                (Quality::Missing, Some(_)) => return Err(schema(&at, "missing point carries a value")),
                (Quality::Observed | Quality::Forecast, None) => return Err(schema(&at, "non-missing point has no value")),
                (_, Some(v)) if !v.is_finite() || v < 0.0 => return Err(schema(&at, format!("value {v} must be finite and >= 0"))),
                _ => {}
            }
            if !seen.insert((r.station_id.clone(), r.kind, date)) {
                return Err(schema(&at, format!("duplicate {:?} point for `{}` on {date}", r.kind, r.station_id)));
            }
            match ds.stations.get(&r.station_id) {
                None => {
                    dangling.push(format!("{} row {}: unknown station `{}`", at.file, at.row, r.station_id));
                    continue;
                }
                Some(st) if !r.kind.allowed_at(st.kind) => {
                    return Err(schema(&at, format!("{:?} series not valid at {} station `{}`", r.kind, st.kind.as_str(), st.station_id)))
                }
                Some(_) => {}
            }
            series.entry((r.station_id.clone(), r.kind)).or_default().push(SeriesPoint {
                station_id: r.station_id,
                date,
                kind: r.kind,
                value: r.value,
                unit: r.unit,
                quality: r.quality,
            });
        }
        series.values_mut().for_each(|points| points.sort_by_key(|p| p.date));
        ds.series = series;

        for (at, t) in raw.thresholds {
            if !(t.critical_level >= 0.0 && t.critical_level <= t.warning_level && t.warning_level.is_finite()) {
                return Err(schema(&at, format!("need 0 <= critical_level <= warning_level, got {} / {}", t.critical_level, t.warning_level)));
            }
            match ds.stations.get(&t.site_id) {
                Some(s) if s.kind == StationKind::EflowSite => {}
                _ => {
                    dangling.push(format!("{} row {}: unknown e-flow site `{}`", at.file, at.row, t.site_id));
                    continue;
                }
            }
            if ds.thresholds.insert(t.site_id.clone(), EflowThreshold { warning_level: t.warning_level, critical_level: t.critical_level }).is_some() {
                return Err(schema(&at, format!("duplicate threshold for `{}`", t.site_id)));
            }
        }
        if !dangling.is_empty() {
            return Err(HydroError::DanglingReference(dangling));
        }
        Ok(ds)
    }
}

/// Anything that can produce a fresh dataset snapshot.
pub trait DatasetSource: Send + Sync {
    fn load(&self) -> Result<Datasets, HydroError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset_id: String,
    pub stations: PathBuf,
    pub series: PathBuf,
    pub thresholds: PathBuf,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(RowRef, T)>, HydroError> {
    let file = path.file_name().and_then(|f| f.to_str()).unwrap_or("?").to_owned();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| HydroError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for rec in rdr.deserialize::<T>() {
        match rec {
            Ok(row) => {
                let line = out.len() as u64 + 2;
                out.push((RowRef { file: file.clone(), row: line }, row));
            }
            Err(e) => {
                let row = e.position().map(|p| p.line()).unwrap_or(0);
                return Err(HydroError::Schema { file, row, message: e.to_string() });
            }
        }
    }
    Ok(out)
}

/// Loads the CSV triple named by a manifest file; paths are relative to it.
#[derive(Debug, Clone)]
pub struct CsvSource {
    manifest: PathBuf,
}

impl CsvSource {
    pub fn new(manifest: impl Into<PathBuf>) -> Self {
        Self { manifest: manifest.into() }
    }
}

impl DatasetSource for CsvSource {
    fn load(&self) -> Result<Datasets, HydroError> {
        let text = std::fs::read_to_string(&self.manifest).map_err(|e| HydroError::Io(format!("{}: {e}", self.manifest.display())))?;
        let m: DatasetManifest = serde_json::from_str(&text).map_err(|e| HydroError::Schema {
            file: self.manifest.display().to_string(),
            row: e.line() as u64,
            message: e.to_string(),
        })?;
        let base = self.manifest.parent().unwrap_or(Path::new("."));
        let raw = RawDataset {
            stations: read_csv(&base.join(&m.stations))?,
            series: read_csv(&base.join(&m.series))?,
            thresholds: read_csv(&base.join(&m.thresholds))?,
        };
        Datasets::from_raw(&m.dataset_id, raw)
    }
}

pub fn load_dataset(manifest: &Path) -> Result<Datasets, HydroError> {
    CsvSource::new(manifest).load()
}

/// HTTP mirror of the CSV schemas: `GET {base}/stations`, `GET
/// {base}/series?since=YYYY-MM-DD&until=YYYY-MM-DD` and `GET
/// {base}/thresholds`, each returning a JSON array of row objects.
pub struct RemoteSource {
    base_url: String,
    dataset_id: String,
    since: Option<NaiveDate>,
    until: Option<NaiveDate>,
    client: reqwest::blocking::Client,
}

impl RemoteSource {
    pub fn new(base_url: &str, dataset_id: &str) -> Result<Self, HydroError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| HydroError::Remote(e.to_string()))?;
        Ok(Self { base_url: base_url.trim_end_matches('/').into(), dataset_id: dataset_id.into(), since: None, until: None, client })
    }

    pub fn with_window(mut self, since: Option<NaiveDate>, until: Option<NaiveDate>) -> Self {
        self.since = since;
        self.until = until;
        self
    }

    fn get<T: for<'de> Deserialize<'de>>(&self, name: &str, query: &[(&str, String)]) -> Result<Vec<(RowRef, T)>, HydroError> {
        let url = format!("{}/{name}", self.base_url);
        let resp = self
            .client
            .get(&url)
            .query(query)
            .send()
            .map_err(|e| HydroError::Remote(format!("GET {url}: {e}")))?;
        if !resp.status().is_success() {
            return Err(HydroError::Remote(format!("GET {url}: HTTP {}", resp.status())));
        }
        let items: Vec<serde_json::Value> = resp.json().map_err(|e| HydroError::Remote(format!("GET {url}: {e}")))?;
        items
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let at = RowRef { file: name.to_owned(), row: i as u64 + 1 };
                serde_json::from_value(v).map(|row| (at.clone(), row)).map_err(|e| schema(&at, e.to_string()))
            })
            .collect()
    }
}

impl DatasetSource for RemoteSource {
    fn load(&self) -> Result<Datasets, HydroError> {
        let mut q = Vec::new();
        if let Some(s) = self.since {
            q.push(("since", s.to_string()));
        }
        if let Some(u) = self.until {
            q.push(("until", u.to_string()));
        }
        let raw = RawDataset {
            stations: self.get("stations", &[])?,
            series: self.get("series", &q)?,
            thresholds: self.get("thresholds", &[])?,
        };
        Datasets::from_raw(&self.dataset_id, raw)
    }
}
