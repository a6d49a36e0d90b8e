//! Hydrology tools over station, series and e-flow threshold datasets.

mod alerts;
mod availability;
mod chart;
mod geo;
mod load;
mod model;
mod rainfall;
mod tools;

pub use alerts::{classify, eflow_alerts, relative_shortfall, AlertRecord, EflowAlertReport, Severity, SiteSummary};
pub use availability::{water_availability, Horizon, QualityMix, StorageReading, WaterAvailability};
pub use chart::{comparison_chart, eflow_chart, rainfall_chart};
pub use geo::{haversine_km, nearest_stations, river_centroid, NearestStation, NearestStations, Target, EARTH_RADIUS_KM};
pub use load::{load_dataset, CsvSource, DatasetManifest, DatasetSource, RawDataset, RemoteSource, RowRef, SeriesRow, ThresholdRow};
pub use model::*;
pub use rainfall::{compare_rainfall, monthly_rainfall, MonthDelta, MonthlyRainfall, MonthlyStats, RainfallComparison};
pub use tools::{HydroTools, TOOL_NAMES};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HydroError {
    #[error("{file} row {row}: {message}")]
    Schema { file: String, row: u64, message: String },
    #[error("dangling references: {}", .0.join("; "))]
    DanglingReference(Vec<String>),
    #[error("io error: {0}")]
    Io(String),
    #[error("remote dataset error: {0}")]
    Remote(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown station `{0}`")]
    UnknownStation(String),
    #[error("station `{station_id}` is a {} station, expected {}", .actual.as_str(), .expected.as_str())]
    WrongKind { station_id: String, expected: StationKind, actual: StationKind },
    #[error("unknown river `{0}`")]
    UnknownRiver(String),
    #[error("no data: {0}")]
    NoData(String),
}

impl HydroError {
    pub fn code(&self) -> &'static str {
        match self {
            HydroError::Schema { .. } => "schema_error",
            HydroError::DanglingReference(_) => "dangling_reference",
            HydroError::Io(_) => "io_error",
            HydroError::Remote(_) => "remote_error",
            HydroError::InvalidArgument(_) => "invalid_argument",
            HydroError::UnknownStation(_) => "unknown_station",
            HydroError::WrongKind { .. } => "wrong_kind",
            HydroError::UnknownRiver(_) => "unknown_river",
            HydroError::NoData(_) => "no_data",
        }
    }
}
