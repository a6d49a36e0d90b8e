use std::sync::{Arc, RwLock};

use serde::Serialize;
use serde_json::{json, Value};

use crate::agent::{validate_args, Args, RegistryError, ToolError, ToolRegistry};
use crate::chart::{ChartKind, ChartSpec};
use crate::clock::Clock;
use crate::protocol::{ParamSpec, ParamType, Table, ToolDescriptor, ToolResult};
use crate::source::SourceRef;

use super::{
    compare_rainfall, comparison_chart, eflow_alerts, eflow_chart, monthly_rainfall, nearest_stations, rainfall_chart,
    water_availability, DatasetSource, Datasets, HydroError, Horizon, StationKind, StationRecord, Target, YearMonth,
};

pub const TOOL_NAMES: [&str; 7] = [
    "list_eflow_sites",
    "nearest_stations",
    "monthly_rainfall",
    "compare_rainfall",
    "water_availability",
    "eflow_alerts",
    "chart_spec",
];

const CHARTABLE: [&str; 3] = ["monthly_rainfall", "compare_rainfall", "eflow_alerts"];

fn kind_names() -> Vec<String> {
    ["rainfall", "discharge", "reservoir", "eflow_site"].map(String::from).to_vec()
}

fn to_tool_error(e: HydroError) -> ToolError {
    ToolError::new(e.code(), e.to_string())
}

fn f2(v: f64) -> String {
    format!("{v:.2}")
}

fn opt2(v: Option<f64>) -> String {
    v.map(f2).unwrap_or_default()
}

fn str_arg<'a>(args: &'a Args, name: &str) -> Result<&'a str, ToolError> {
    args.get(name).and_then(Value::as_str).ok_or_else(|| ToolError::invalid_argument(format!("`{name}` must be a string")))
}

fn int_arg(args: &Args, name: &str) -> Result<Option<i64>, ToolError> {
    match args.get(name) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v.as_i64().map(Some).ok_or_else(|| ToolError::invalid_argument(format!("`{name}` must be an integer"))),
    }
}

fn year_arg(args: &Args, name: &str) -> Result<i32, ToolError> {
    let y = int_arg(args, name)?.ok_or_else(|| ToolError::invalid_argument(format!("`{name}` is required")))?;
    i32::try_from(y).map_err(|_| ToolError::invalid_argument(format!("`{name}` is out of range")))
}

fn month_arg(args: &Args, name: &str) -> Result<YearMonth, ToolError> {
    str_arg(args, name)?.parse().map_err(to_tool_error)
}

fn parse_enum<T: serde::de::DeserializeOwned>(v: &str, name: &str) -> Result<T, ToolError> {
    serde_json::from_value(Value::String(v.to_owned())).map_err(|_| ToolError::invalid_argument(format!("`{name}` has unsupported value `{v}`")))
}

fn content<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).unwrap_or(Value::Null)
}

/// Hydrology tool set over a swappable dataset snapshot. Each call works on
/// the snapshot current when it started.
pub struct HydroTools {
    data: RwLock<Arc<Datasets>>,
    clock: Clock,
}

impl HydroTools {
    pub fn new(data: Datasets, clock: Clock) -> Self {
        Self { data: RwLock::new(Arc::new(data)), clock }
    }

    pub fn snapshot(&self) -> Arc<Datasets> {
        self.data.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    pub fn replace(&self, data: Datasets) {
        *self.data.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(data);
    }

    /// Loads a fresh snapshot and swaps it in; the old one stays in place on error.
    pub fn reload(&self, source: &dyn DatasetSource) -> Result<(), HydroError> {
        let fresh = source.load()?;
        self.replace(fresh);
        Ok(())
    }

    pub fn upsert_station(&self, station: StationRecord) -> Result<(), HydroError> {
        let mut guard = self.data.write().unwrap_or_else(|p| p.into_inner());
        let mut next = (**guard).clone();
        next.upsert_station(station)?;
        *guard = Arc::new(next);
        Ok(())
    }

    pub fn descriptors() -> Vec<ToolDescriptor> {
        let chart_kinds = ParamType::Enum(vec!["line".into(), "bar".into(), "grouped_bar".into()]);
        vec![
            ToolDescriptor::new("list_eflow_sites", "List all environmental-flow monitoring sites, sorted by site id.", vec![]),
            ToolDescriptor::new(
                "nearest_stations",
                "Find the stations closest to a river (centroid of its stations) or to a lat/lon point.",
                vec![
                    ParamSpec::optional("river", ParamType::String, "River name, e.g. Olifants"),
                    ParamSpec::optional("lat", ParamType::Number, "Latitude in degrees"),
                    ParamSpec::optional("lon", ParamType::Number, "Longitude in degrees"),
                    ParamSpec::optional("n", ParamType::Integer, "Number of stations (default 5)"),
                    ParamSpec::optional("kind", ParamType::Enum(kind_names()), "Only stations of this kind"),
                ],
            ),
            ToolDescriptor::new(
                "monthly_rainfall",
                "Monthly min, max, average and total rainfall (mm) at a rainfall station for one year.",
                vec![
                    ParamSpec::required("station_id", ParamType::String, "Rainfall station id"),
                    ParamSpec::required("year", ParamType::Integer, "Calendar year"),
                ],
            ),
            ToolDescriptor::new(
                "compare_rainfall",
                "Compare monthly rainfall totals at one station between two years (delta = year_a - year_b).",
                vec![
                    ParamSpec::required("station_id", ParamType::String, "Rainfall station id"),
                    ParamSpec::required("year_a", ParamType::Integer, "First year"),
                    ParamSpec::required("year_b", ParamType::Integer, "Second year"),
                ],
            ),
            ToolDescriptor::new(
                "water_availability",
                "Reservoir storage (Mm3) available on a river at the end of a month, historical or forecast.",
                vec![
                    ParamSpec::required("river", ParamType::String, "River name"),
                    ParamSpec::required("month", ParamType::String, "Month as YYYY-MM"),
                    ParamSpec::optional("horizon", ParamType::Enum(vec!["historical".into(), "forecast".into()]), "Default historical"),
                ],
            ),
            ToolDescriptor::new(
                "eflow_alerts",
                "Evaluate daily flow at every e-flow site against its warning and critical thresholds for a month.",
                vec![ParamSpec::required("period", ParamType::String, "Month as YYYY-MM")],
            ),
            ToolDescriptor::new(
                "chart_spec",
                "Build a chart description from the result of monthly_rainfall, compare_rainfall or eflow_alerts.",
                vec![
                    ParamSpec::required("tool", ParamType::Enum(CHARTABLE.map(String::from).to_vec()), "Underlying tool"),
                    ParamSpec::required("params", ParamType::Object, "Arguments for the underlying tool"),
                    ParamSpec::optional("chart_kind", chart_kinds, "line, bar or grouped_bar (default bar)"),
                ],
            ),
        ]
    }

    pub fn register(self: Arc<Self>, registry: &mut ToolRegistry) -> Result<(), RegistryError> {
        for d in Self::descriptors() {
            let me = self.clone();
            let name = d.name.clone();
            registry.register(d, Arc::new(move |args: &Args| me.call(&name, args)))?;
        }
        Ok(())
    }

    fn source_ref(&self, ds: &Datasets, query_params: Value) -> SourceRef {
        SourceRef::Dataset { dataset_id: ds.dataset_id().to_owned(), query_params, retrieved_at: self.clock.now_rfc3339() }
    }

    /// Runs one tool by name against the current snapshot.
    pub fn call(&self, name: &str, args: &Args) -> Result<ToolResult, ToolError> {
        let ds = self.snapshot();
        let (content, table, chart) = match name {
            "list_eflow_sites" => self.list_eflow_sites(&ds),
            "nearest_stations" => self.nearest(&ds, args)?,
            "monthly_rainfall" => self.monthly(&ds, args)?,
            "compare_rainfall" => self.compare(&ds, args)?,
            "water_availability" => self.availability(&ds, args)?,
            "eflow_alerts" => self.alerts(&ds, args)?,
            "chart_spec" => self.chart(&ds, args)?,
            other => return Err(ToolError::new("unknown_tool", format!("no hydrology tool named `{other}`"))),
        };
        let mut out = ToolResult::ok(content, vec![self.source_ref(&ds, json!({ "tool": name, "params": args }))]);
        if let Some(t) = table {
            out = out.with_table(t);
        }
        if let Some(c) = chart {
            out = out.with_chart(c);
        }
        Ok(out)
    }

    fn list_eflow_sites(&self, ds: &Datasets) -> (Value, Option<Table>, Option<ChartSpec>) {
        let sites: Vec<_> = ds
            .stations()
            .filter(|s| s.kind == StationKind::EflowSite)
            .map(|s| json!({ "site_id": s.station_id, "name": s.name, "river": s.river }))
            .collect();
        let table = Table {
            columns: vec!["site_id".into(), "name".into(), "river".into()],
            rows: sites.iter().map(|s| ["site_id", "name", "river"].iter().map(|k| s[k].as_str().unwrap_or("").to_owned()).collect()).collect(),
        };
        (json!({ "sites": sites }), Some(table), None)
    }

    fn nearest(&self, ds: &Datasets, args: &Args) -> Result<(Value, Option<Table>, Option<ChartSpec>), ToolError> {
        let target = match (args.get("river").and_then(Value::as_str), args.get("lat").and_then(Value::as_f64), args.get("lon").and_then(Value::as_f64)) {
            (Some(river), None, None) => Target::River { river: river.to_owned() },
            (None, Some(lat), Some(lon)) => Target::Point { lat, lon },
            _ => return Err(ToolError::invalid_argument("give either `river` or both `lat` and `lon`")),
        };
        let n = int_arg(args, "n")?.unwrap_or(5);
        if n < 1 {
            return Err(ToolError::invalid_argument("`n` must be at least 1"));
        }
        let kind = args.get("kind").and_then(Value::as_str).map(|k| parse_enum::<StationKind>(k, "kind")).transpose()?;
        let r = nearest_stations(ds, &target, n as usize, kind).map_err(to_tool_error)?;
        let table = Table {
            columns: vec!["station_id".into(), "name".into(), "river".into(), "kind".into(), "distance_km".into()],
            rows: r
                .stations
                .iter()
                .map(|s| vec![s.station.station_id.clone(), s.station.name.clone(), s.station.river.clone(), s.station.kind.as_str().into(), f2(s.distance_km)])
                .collect(),
        };
        Ok((content(&r), Some(table), None))
    }

    fn monthly(&self, ds: &Datasets, args: &Args) -> Result<(Value, Option<Table>, Option<ChartSpec>), ToolError> {
        let r = monthly_rainfall(ds, str_arg(args, "station_id")?, year_arg(args, "year")?).map_err(to_tool_error)?;
        let table = Table {
            columns: ["Month", "Min Rainfall (mm)", "Max Rainfall (mm)", "Avg Rainfall (mm)", "Total Rainfall (mm)"].map(String::from).to_vec(),
            rows: r.months.iter().map(|m| vec![m.month.to_string(), opt2(m.min), opt2(m.max), opt2(m.avg), f2(m.total)]).collect(),
        };
        Ok((content(&r), Some(table), None))
    }

    fn compare(&self, ds: &Datasets, args: &Args) -> Result<(Value, Option<Table>, Option<ChartSpec>), ToolError> {
        let (a, b) = (year_arg(args, "year_a")?, year_arg(args, "year_b")?);
        let r = compare_rainfall(ds, str_arg(args, "station_id")?, a, b).map_err(to_tool_error)?;
        let table = Table {
            columns: vec!["Month".into(), format!("Total {a} (mm)"), format!("Total {b} (mm)"), "Delta (mm)".into()],
            rows: r.deltas.iter().zip(r.a.iter().zip(&r.b)).map(|(d, (x, y))| vec![d.month.clone(), f2(x.total), f2(y.total), f2(d.delta)]).collect(),
        };
        Ok((content(&r), Some(table), None))
    }

    fn availability(&self, ds: &Datasets, args: &Args) -> Result<(Value, Option<Table>, Option<ChartSpec>), ToolError> {
        let horizon = match args.get("horizon").and_then(Value::as_str) {
            Some(h) => parse_enum::<Horizon>(h, "horizon")?,
            None => Horizon::Historical,
        };
        let r = water_availability(ds, str_arg(args, "river")?, month_arg(args, "month")?, horizon).map_err(to_tool_error)?;
        let table = Table {
            columns: ["station_id", "date", "storage (Mm3)", "quality"].map(String::from).to_vec(),
            rows: r
                .readings
                .iter()
                .map(|x| vec![x.station_id.clone(), x.date.to_string(), f2(x.volume_mm3), horizon.quality_label().into()])
                .collect(),
        };
        Ok((content(&r), Some(table), None))
    }

    fn alerts(&self, ds: &Datasets, args: &Args) -> Result<(Value, Option<Table>, Option<ChartSpec>), ToolError> {
        let r = eflow_alerts(ds, month_arg(args, "period")?);
        let table = Table {
            columns: ["site_id", "name", "river", "worst severity", "days", "worst relative shortfall"].map(String::from).to_vec(),
            rows: r
                .sites
                .iter()
                .map(|s| vec![s.site_id.clone(), s.name.clone(), s.river.clone(), s.worst.as_str().into(), s.days.to_string(), f2(s.worst_relative_shortfall)])
                .chain(r.no_data.iter().map(|id| vec![id.clone(), String::new(), String::new(), "no_data".into(), "0".into(), String::new()]))
                .collect(),
        };
        Ok((content(&r), Some(table), None))
    }

    fn chart(&self, ds: &Datasets, args: &Args) -> Result<(Value, Option<Table>, Option<ChartSpec>), ToolError> {
        let tool = str_arg(args, "tool")?;
        if !CHARTABLE.contains(&tool) {
            return Err(ToolError::invalid_argument(format!("`{tool}` cannot be charted")));
        }
        let params = args.get("params").and_then(Value::as_object).cloned().unwrap_or_default();
        let descriptor = Self::descriptors().into_iter().find(|d| d.name == tool).expect("chartable tools are described");
        validate_args(&descriptor, &params).map_err(|e| ToolError::new("invalid_arguments", e.message()))?;
        let kind = match args.get("chart_kind").and_then(Value::as_str) {
            Some(k) => parse_enum::<ChartKind>(k, "chart_kind")?,
            None => ChartKind::Bar,
        };
        let (table, spec) = match tool {
            "monthly_rainfall" => {
                let (_, table, _) = self.monthly(ds, &params)?;
                let r = monthly_rainfall(ds, str_arg(&params, "station_id")?, year_arg(&params, "year")?).map_err(to_tool_error)?;
                (table, rainfall_chart(&r, kind))
            }
            "compare_rainfall" => {
                let (_, table, _) = self.compare(ds, &params)?;
                let r = compare_rainfall(ds, str_arg(&params, "station_id")?, year_arg(&params, "year_a")?, year_arg(&params, "year_b")?)
                    .map_err(to_tool_error)?;
                (table, comparison_chart(&r, kind))
            }
            _ => {
                let (_, table, _) = self.alerts(ds, &params)?;
                (table, eflow_chart(&eflow_alerts(ds, month_arg(&params, "period")?), kind))
            }
        };
        Ok((json!({ "chart": spec }), table, Some(spec)))
    }
}
