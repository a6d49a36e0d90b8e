use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::model::{Datasets, Quality, SeriesKind, StationKind, YearMonth, MONTH_LABELS};
use super::HydroError;

/// Statistics over the observed (non-missing) daily points of one month.
/// `min`, `max` and `avg` are absent when nothing was observed; `total` is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyStats {
    pub month: YearMonth,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub avg: Option<f64>,
    pub total: f64,
    pub n_observed: usize,
}

impl MonthlyStats {
    pub fn from_values(month: YearMonth, values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { month, min: None, max: None, avg: None, total: 0.0, n_observed: 0 };
        }
        let total: f64 = values.iter().sum();
        Self {
            month,
            min: values.iter().copied().reduce(f64::min),
            max: values.iter().copied().reduce(f64::max),
            avg: Some(total / values.len() as f64),
            total,
            n_observed: values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyRainfall {
    pub station_id: String,
    pub station_name: String,
    pub year: i32,
    pub months: Vec<MonthlyStats>,
}

fn rainfall_station<'a>(ds: &'a Datasets, station_id: &str) -> Result<&'a super::StationRecord, HydroError> {
    let st = ds.station(station_id).ok_or_else(|| HydroError::UnknownStation(station_id.to_owned()))?;
    if st.kind != StationKind::Rainfall {
        return Err(HydroError::WrongKind { station_id: station_id.to_owned(), expected: StationKind::Rainfall, actual: st.kind });
    }
    Ok(st)
}

pub fn monthly_rainfall(ds: &Datasets, station_id: &str, year: i32) -> Result<MonthlyRainfall, HydroError> {
    let st = rainfall_station(ds, station_id)?;
    let mut by_month: [Vec<f64>; 12] = Default::default();
    for p in ds.series(station_id, SeriesKind::Rainfall) {
        if p.date.year() == year && p.quality == Quality::Observed {
            if let Some(v) = p.value {
                by_month[p.date.month0() as usize].push(v);
            }
        }
    }
    let months = by_month
        .iter()
        .enumerate()
        .map(|(m, values)| MonthlyStats::from_values(YearMonth { year, month: m as u32 + 1 }, values))
        .collect();
    Ok(MonthlyRainfall { station_id: st.station_id.clone(), station_name: st.name.clone(), year, months })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthDelta {
    pub month: String,
    /// total(year_a) - total(year_b)
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RainfallComparison {
    pub station_id: String,
    pub station_name: String,
    pub year_a: i32,
    pub year_b: i32,
    pub a: Vec<MonthlyStats>,
    pub b: Vec<MonthlyStats>,
    pub deltas: Vec<MonthDelta>,
    /// Years among (a, b) with no observations at all; treated as empty months.
    pub absent_years: Vec<i32>,
}

pub fn compare_rainfall(ds: &Datasets, station_id: &str, year_a: i32, year_b: i32) -> Result<RainfallComparison, HydroError> {
    let a = monthly_rainfall(ds, station_id, year_a)?;
    let b = monthly_rainfall(ds, station_id, year_b)?;
    let deltas = a
        .months
        .iter()
        .zip(&b.months)
        .enumerate()
        .map(|(i, (x, y))| MonthDelta { month: MONTH_LABELS[i].to_owned(), delta: x.total - y.total })
        .collect();
    let mut absent_years = Vec::new();
    for (year, stats) in [(year_a, &a.months), (year_b, &b.months)] {
        if stats.iter().all(|m| m.n_observed == 0) && !absent_years.contains(&year) {
            absent_years.push(year);
        }
    }
    Ok(RainfallComparison {
        station_id: a.station_id,
        station_name: a.station_name,
        year_a,
        year_b,
        a: a.months,
        b: b.months,
        deltas,
        absent_years,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_small_month() {
        let m = MonthlyStats::from_values(YearMonth { year: 2024, month: 1 }, &[0.0, 10.0, 5.0]);
        assert_eq!((m.min, m.max, m.avg, m.total, m.n_observed), (Some(0.0), Some(10.0), Some(5.0), 15.0, 3));
        let e = MonthlyStats::from_values(YearMonth { year: 2024, month: 2 }, &[]);
        assert_eq!((e.total, e.avg, e.n_observed), (0.0, None, 0));
    }
}
