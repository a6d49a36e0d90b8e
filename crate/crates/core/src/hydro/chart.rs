use crate::chart::{Axis, ChartKind, ChartPoint, ChartSeries, ChartSpec};

use super::alerts::EflowAlertReport;
use super::rainfall::{MonthlyRainfall, MonthlyStats, RainfallComparison};
use super::MONTH_LABELS;

fn month_axis() -> Axis {
    Axis { label: "Month".into(), unit: None }
}

fn rain_axis(label: &str) -> Axis {
    Axis { label: label.into(), unit: Some("mm".into()) }
}

fn monthly_series(label: &str, months: &[MonthlyStats], pick: impl Fn(&MonthlyStats) -> Option<f64>) -> ChartSeries {
    ChartSeries {
        label: label.into(),
        points: months.iter().map(|m| ChartPoint { x: MONTH_LABELS[m.month.month as usize - 1].into(), y: pick(m) }).collect(),
    }
}

/// Line and bar charts plot the monthly total; grouped bars show
/// min/avg/max/total side by side.
pub fn rainfall_chart(r: &MonthlyRainfall, kind: ChartKind) -> ChartSpec {
    let series = match kind {
        ChartKind::GroupedBar => vec![
            monthly_series("Min Rainfall", &r.months, |m| m.min),
            monthly_series("Avg Rainfall", &r.months, |m| m.avg),
            monthly_series("Max Rainfall", &r.months, |m| m.max),
            monthly_series("Total Rainfall", &r.months, |m| Some(m.total)),
        ],
        ChartKind::Line | ChartKind::Bar => vec![monthly_series("Total Rainfall", &r.months, |m| Some(m.total))],
    };
    ChartSpec {
        kind,
        title: format!("Monthly rainfall at {} ({})", r.station_name, r.year),
        x_axis: month_axis(),
        y_axis: rain_axis("Rainfall"),
        series,
    }
}

/// One series of monthly totals per year.
pub fn comparison_chart(c: &RainfallComparison, kind: ChartKind) -> ChartSpec {
    ChartSpec {
        kind,
        title: format!("Monthly rainfall at {}: {} vs {}", c.station_name, c.year_a, c.year_b),
        x_axis: month_axis(),
        y_axis: rain_axis("Total rainfall"),
        series: vec![
            monthly_series(&c.year_a.to_string(), &c.a, |m| Some(m.total)),
            monthly_series(&c.year_b.to_string(), &c.b, |m| Some(m.total)),
        ],
    }
}

/// Daily observed flow per site. Sites without data contribute no series.
pub fn eflow_chart(r: &EflowAlertReport, kind: ChartKind) -> ChartSpec {
    let series = r
        .sites
        .iter()
        .map(|s| ChartSeries {
            label: s.site_id.clone(),
            points: r
                .alerts
                .iter()
                .filter(|a| a.site_id == s.site_id)
                .map(|a| ChartPoint { x: a.date.to_string(), y: Some(a.flow) })
                .collect(),
        })
        .collect();
    ChartSpec {
        kind,
        title: format!("Daily flow at e-flow sites, {}", r.period),
        x_axis: Axis { label: "Date".into(), unit: None },
        y_axis: Axis { label: "Flow".into(), unit: Some("m3_per_s".into()) },
        series,
    }
}
