use serde::{Deserialize, Serialize};

use super::model::{Datasets, Quality, SeriesKind, StationKind, YearMonth};
use super::HydroError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    #[default]
    Historical,
    Forecast,
}

impl Horizon {
    pub fn as_str(self) -> &'static str {
        match self {
            Horizon::Historical => "historical",
            Horizon::Forecast => "forecast",
        }
    }

    pub fn quality_label(self) -> &'static str {
        match self {
            Horizon::Historical => "observed",
            Horizon::Forecast => "forecast",
        }
    }

    fn quality(self) -> Quality {
        match self {
            Horizon::Historical => Quality::Observed,
            Horizon::Forecast => Quality::Forecast,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageReading {
    pub station_id: String,
    pub date: chrono::NaiveDate,
    pub volume_mm3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct QualityMix {
    pub observed: usize,
    pub forecast: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterAvailability {
    pub river: String,
    pub month: YearMonth,
    pub horizon: Horizon,
    /// Set for forecast results so consumers cannot mistake them for observations.
    pub is_forecast: bool,
    pub volume_mm3: f64,
    pub n_stations: usize,
    pub quality_mix: QualityMix,
    pub readings: Vec<StorageReading>,
}

/// Sum over the river's reservoirs of the last storage value reported in
/// `month` whose quality matches `horizon`.
pub fn water_availability(ds: &Datasets, river: &str, month: YearMonth, horizon: Horizon) -> Result<WaterAvailability, HydroError> {
    let stations = ds.stations_on_river(river);
    if !stations.iter().any(|s| matches!(s.kind, StationKind::Reservoir | StationKind::Discharge)) {
        return Err(HydroError::UnknownRiver(river.to_owned()));
    }
    let wanted = horizon.quality();
    let mut readings = Vec::new();
    let mut mix = QualityMix::default();
    for st in stations.iter().filter(|s| s.kind == StationKind::Reservoir) {
        let last = ds
            .series(&st.station_id, SeriesKind::Storage)
            .iter()
            .filter(|p| month.contains(p.date) && p.quality == wanted)
            .filter_map(|p| p.value.map(|v| (p, v)))
            .next_back();
        if let Some((p, v)) = last {
            match p.quality {
                Quality::Observed => mix.observed += 1,
                Quality::Forecast => mix.forecast += 1,
                Quality::Missing => {}
            }
            readings.push(StorageReading { station_id: st.station_id.clone(), date: p.date, volume_mm3: v });
        }
    }
    if readings.is_empty() {
        return Err(HydroError::NoData(format!("no {} storage reported for {river} in {month}", horizon.as_str())));
    }
    Ok(WaterAvailability {
        river: river.to_owned(),
        month,
        horizon,
        is_forecast: horizon == Horizon::Forecast,
        volume_mm3: readings.iter().map(|r| r.volume_mm3).sum(),
        n_stations: readings.len(),
        quality_mix: mix,
        readings,
    })
}
