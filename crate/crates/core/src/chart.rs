//! Renderer-neutral chart description produced by the hydrology tools.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Line,
    Bar,
    GroupedBar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub x: String,
    /// Absent for gaps (e.g. a month without observations).
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub label: String,
    pub points: Vec<ChartPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub title: String,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub series: Vec<ChartSeries>,
}

impl ChartSpec {
    /// Distinct x labels in first-seen order across all series.
    pub fn x_labels(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for s in &self.series {
            for p in &s.points {
                if !seen.contains(&p.x.as_str()) {
                    seen.push(&p.x);
                }
            }
        }
        seen
    }
}
