use serde::{Deserialize, Serialize};

use super::model::{Datasets, StationKind, StationRecord};
use super::HydroError;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Great-circle distance in km on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = (lat2 - lat1).to_radians();
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    River { river: String },
    Point { lat: f64, lon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestStation {
    pub station: StationRecord,
    pub distance_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestStations {
    /// Reference point actually used (the river centroid for river targets).
    pub reference: [f64; 2],
    pub stations: Vec<NearestStation>,
}

/// Mean latitude/longitude of every station on the river, of any kind.
pub fn river_centroid(ds: &Datasets, river: &str) -> Result<[f64; 2], HydroError> {
    let on_river = ds.stations_on_river(river);
    if on_river.is_empty() {
        return Err(HydroError::UnknownRiver(river.to_owned()));
    }
    let n = on_river.len() as f64;
    Ok([on_river.iter().map(|s| s.lat).sum::<f64>() / n, on_river.iter().map(|s| s.lon).sum::<f64>() / n])
}

/// The `n` closest stations (optionally of one kind), ascending by distance,
/// ties broken by station id.
pub fn nearest_stations(ds: &Datasets, target: &Target, n: usize, kind: Option<StationKind>) -> Result<NearestStations, HydroError> {
    let reference = match target {
        Target::River { river } => river_centroid(ds, river)?,
        Target::Point { lat, lon } => {
            if !(-90.0..=90.0).contains(lat) || !(-180.0..=180.0).contains(lon) {
                return Err(HydroError::InvalidArgument(format!("coordinates ({lat}, {lon}) out of range")));
            }
            [*lat, *lon]
        }
    };
    let mut all: Vec<NearestStation> = ds
        .stations()
        .filter(|s| kind.is_none_or(|k| s.kind == k))
        .map(|s| NearestStation { distance_km: haversine_km(reference[0], reference[1], s.lat, s.lon), station: s.clone() })
        .collect();
    all.sort_by(|a, b| a.distance_km.total_cmp(&b.distance_km).then_with(|| a.station.station_id.cmp(&b.station.station_id)));
    all.truncate(n);
    Ok(NearestStations { reference, stations: all })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_degree_of_longitude_on_equator() {
        // R * (pi / 180)
        let expected = 6371.0 * std::f64::consts::PI / 180.0;
        let d = haversine_km(0.0, 0.0, 0.0, 1.0);
        assert!((d - expected).abs() < 1e-9);
        assert!((d - 111.195).abs() < 0.001);
    }

    #[test]
    fn identity_and_symmetry() {
        assert_eq!(haversine_km(-23.5, 29.1, -23.5, 29.1), 0.0);
        let a = haversine_km(-22.0, 31.0, -25.0, 27.5);
        let b = haversine_km(-25.0, 27.5, -22.0, 31.0);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn antipodes() {
        let d = haversine_km(0.0, 0.0, 0.0, 180.0);
        assert!((d - 6371.0 * std::f64::consts::PI).abs() < 1e-6);
    }
}
