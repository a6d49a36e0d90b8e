use serde::{Deserialize, Serialize};

use super::model::{Datasets, EflowThreshold, Quality, SeriesKind, YearMonth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Normal,
    Warning,
    Critical,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Normal => "normal",
            Severity::Warning => "warning",
            Severity::Critical => "critical",
        }
    }
}

/// critical: flow < critical_level; warning: critical_level <= flow < warning_level.
pub fn classify(flow: f64, t: &EflowThreshold) -> Severity {
    if flow < t.critical_level {
        Severity::Critical
    } else if flow < t.warning_level {
        Severity::Warning
    } else {
        Severity::Normal
    }
}

/// The threshold a severity class is measured against (warning level for normal).
fn reference_level(severity: Severity, t: &EflowThreshold) -> f64 {
    match severity {
        Severity::Critical => t.critical_level,
        Severity::Warning | Severity::Normal => t.warning_level,
    }
}

/// (threshold - flow) / threshold for the class threshold; 0 when the threshold is 0.
pub fn relative_shortfall(flow: f64, severity: Severity, t: &EflowThreshold) -> f64 {
    let level = reference_level(severity, t);
    if level > 0.0 {
        (level - flow) / level
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertRecord {
    pub site_id: String,
    pub date: chrono::NaiveDate,
    pub severity: Severity,
    pub flow: f64,
    /// Class threshold minus flow (warning level for normal days).
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSummary {
    pub site_id: String,
    pub name: String,
    pub river: String,
    pub worst: Severity,
    pub worst_relative_shortfall: f64,
    pub days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EflowAlertReport {
    pub period: YearMonth,
    pub alerts: Vec<AlertRecord>,
    pub sites: Vec<SiteSummary>,
    /// Site with the highest severity class, then largest relative shortfall,
    /// then smallest id. Absent when every site is normal.
    pub most_critical: Option<String>,
    /// Sites with thresholds but no observed flow in the period.
    pub no_data: Vec<String>,
}

pub fn eflow_alerts(ds: &Datasets, period: YearMonth) -> EflowAlertReport {
    let mut alerts = Vec::new();
    let mut sites = Vec::new();
    let mut no_data = Vec::new();
    for (site_id, t) in ds.thresholds() {
        let flows: Vec<_> = ds
            .series(site_id, SeriesKind::Discharge)
            .iter()
            .filter(|p| period.contains(p.date) && p.quality == Quality::Observed)
            .filter_map(|p| p.value.map(|v| (p.date, v)))
            .collect();
        if flows.is_empty() {
            no_data.push(site_id.clone());
            continue;
        }
        let mut worst = Severity::Normal;
        let mut worst_short = f64::NEG_INFINITY;
        for (date, flow) in &flows {
            let severity = classify(*flow, t);
            let short = relative_shortfall(*flow, severity, t);
            if severity > worst || (severity == worst && short > worst_short) {
                worst = severity;
                worst_short = short;
            }
            alerts.push(AlertRecord { site_id: site_id.clone(), date: *date, severity, flow: *flow, margin: reference_level(severity, t) - flow });
        }
        let st = ds.station(site_id);
        sites.push(SiteSummary {
            site_id: site_id.clone(),
            name: st.map(|s| s.name.clone()).unwrap_or_default(),
            river: st.map(|s| s.river.clone()).unwrap_or_default(),
            worst,
            worst_relative_shortfall: worst_short,
            days: flows.len(),
        });
    }
    let most_critical = sites
        .iter()
        .filter(|s| s.worst > Severity::Normal)
        .max_by(|a, b| {
            a.worst
                .cmp(&b.worst)
                .then(a.worst_relative_shortfall.total_cmp(&b.worst_relative_shortfall))
                .then_with(|| b.site_id.cmp(&a.site_id))
        })
        .map(|s| s.site_id.clone());
    EflowAlertReport { period, alerts, sites, most_critical, no_data }
}
