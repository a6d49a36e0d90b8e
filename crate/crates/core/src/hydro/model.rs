use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::HydroError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationKind {
    Rainfall,
    Discharge,
    Reservoir,
    EflowSite,
}

impl StationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StationKind::Rainfall => "rainfall",
            StationKind::Discharge => "discharge",
            StationKind::Reservoir => "reservoir",
            StationKind::EflowSite => "eflow_site",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Rainfall,
    Discharge,
    Storage,
}

impl SeriesKind {
    pub fn unit(self) -> Unit {
        match self {
            SeriesKind::Rainfall => Unit::Mm,
            SeriesKind::Discharge => Unit::M3PerS,
            SeriesKind::Storage => Unit::Mm3,
        }
    }

    /// Station kinds allowed to report this series.
    pub fn allowed_at(self, station: StationKind) -> bool {
        matches!(
            (self, station),
            (SeriesKind::Rainfall, StationKind::Rainfall)
                | (SeriesKind::Discharge, StationKind::Discharge | StationKind::EflowSite)
                | (SeriesKind::Storage, StationKind::Reservoir)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "mm")]
    Mm,
    #[serde(rename = "m3_per_s")]
    M3PerS,
    #[serde(rename = "Mm3")]
    Mm3,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Mm => "mm",
            Unit::M3PerS => "m3_per_s",
            Unit::Mm3 => "Mm3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Observed,
    Forecast,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub station_id: String,
    pub name: String,
    pub river: String,
    pub country: String,
    pub lat: f64,
    pub lon: f64,
    pub kind: StationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub station_id: String,
    pub date: NaiveDate,
    pub kind: SeriesKind,
    /// Absent exactly when `quality` is `missing`.
    pub value: Option<f64>,
    pub unit: Unit,
    pub quality: Quality,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EflowThreshold {
    pub warning_level: f64,
    pub critical_level: f64,
}

/// Calendar month, rendered `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self, HydroError> {
        if !(1..=12).contains(&month) {
            return Err(HydroError::InvalidArgument(format!("month {month} out of range")));
        }
        Ok(Self { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        Self { year: date.year(), month: date.month() }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        date.year() == self.year && date.month() == self.month
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl std::str::FromStr for YearMonth {
    type Err = HydroError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HydroError::InvalidArgument(format!("`{s}` is not a YYYY-MM month"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        YearMonth::new(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub const MONTH_LABELS: [&str; 12] = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];

/// Lowercased river name with a trailing " river" removed, so "Olifants
/// River" and "olifants" resolve to the same river.
pub fn river_key(name: &str) -> String {
    let lower = name.trim().to_lowercase();
    lower.strip_suffix(" river").map(str::trim_end).unwrap_or(&lower).to_owned()
}

/// Immutable, integrity-checked snapshot of stations, series and thresholds.
#[derive(Debug, Clone, Default)]
pub struct Datasets {
    pub(crate) dataset_id: String,
    pub(crate) stations: BTreeMap<String, StationRecord>,
    /// Keyed by (station, series kind); points sorted by date.
    pub(crate) series: BTreeMap<(String, SeriesKind), Vec<SeriesPoint>>,
    pub(crate) thresholds: BTreeMap<String, EflowThreshold>,
}

impl Datasets {
    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    pub fn stations(&self) -> impl Iterator<Item = &StationRecord> {
        self.stations.values()
    }

    pub fn station(&self, id: &str) -> Option<&StationRecord> {
        self.stations.get(id)
    }

    pub fn series(&self, station_id: &str, kind: SeriesKind) -> &[SeriesPoint] {
        self.series.get(&(station_id.to_owned(), kind)).map(Vec::as_slice).unwrap_or_default()
    }

    pub fn all_points(&self) -> impl Iterator<Item = &SeriesPoint> {
        self.series.values().flatten()
    }

    pub fn thresholds(&self) -> &BTreeMap<String, EflowThreshold> {
        &self.thresholds
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn point_count(&self) -> usize {
        self.series.values().map(Vec::len).sum()
    }

    pub fn stations_on_river(&self, river: &str) -> Vec<&StationRecord> {
        let key = river_key(river);
        self.stations.values().filter(|s| river_key(&s.river) == key).collect()
    }

    pub fn upsert_station(&mut self, station: StationRecord) -> Result<(), HydroError> {
        validate_station(&station).map_err(HydroError::InvalidArgument)?;
        self.stations.insert(station.station_id.clone(), station);
        Ok(())
    }
}

pub(crate) fn validate_station(s: &StationRecord) -> Result<(), String> {
    if s.station_id.trim().is_empty() {
        return Err("empty station_id".into());
    }
    if !(-90.0..=90.0).contains(&s.lat) {
        return Err(format!("latitude {} out of range", s.lat));
    }
    if !(-180.0..=180.0).contains(&s.lon) {
        return Err(format!("longitude {} out of range", s.lon));
    }
    Ok(())
}
