use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::session::Session;
use crate::protocol::{Table, TurnContent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Markdown,
    Csv,
    Json,
}

impl ExportFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Markdown => "text/markdown; charset=utf-8",
            ExportFormat::Csv => "text/csv; charset=utf-8",
            ExportFormat::Json => "application/json",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Markdown => "md",
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = ExportError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ExportFormat::Markdown),
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            _ => Err(ExportError::UnknownFormat(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExportError {
    #[error("the session has no answer to export yet")]
    NothingToExport,
    #[error("no tabular tool result to export as csv")]
    NoTabularResult,
    #[error("unknown export format `{0}` (use markdown, csv or json)")]
    UnknownFormat(String),
}

fn markdown_table(t: &Table) -> String {
    let esc = |s: &str| s.replace('|', "\\|").replace('\n', " ");
    let mut out = format!("| {} |\n", t.columns.iter().map(|c| esc(c)).collect::<Vec<_>>().join(" | "));
    out.push_str(&format!("|{}\n", " --- |".repeat(t.columns.len())));
    for row in &t.rows {
        out.push_str(&format!("| {} |\n", row.iter().map(|c| esc(c)).collect::<Vec<_>>().join(" | ")));
    }
    out
}

/// Markdown: the last answer, its table if any, and a numbered reference
/// list. CSV: the most recent successful tool result that carried a table.
/// JSON: the last answer as returned by the API.
pub fn export_answer(session: &Session, format: ExportFormat) -> Result<Vec<u8>, ExportError> {
    let state = session.lock();
    let answer = state.answers.last().ok_or(ExportError::NothingToExport)?;
    match format {
        ExportFormat::Markdown => {
            let mut md = String::new();
            let _ = writeln!(md, "# Answer\n\n{}\n", answer.text.trim_end());
            if let Some(t) = &answer.table {
                let _ = writeln!(md, "{}", markdown_table(t));
            }
            if !answer.refs.is_empty() {
                md.push_str("## References\n\n");
                for (i, r) in answer.refs.iter().enumerate() {
                    let _ = writeln!(md, "[{}] {}", i + 1, r.describe());
                }
            }
            Ok(md.into_bytes())
        }
        ExportFormat::Csv => {
            let table = state
                .turns
                .iter()
                .rev()
                .find_map(|t| match &t.content {
                    TurnContent::ToolResult { result, .. } if result.ok => result.table.as_ref(),
                    _ => None,
                })
                .ok_or(ExportError::NoTabularResult)?;
            Ok(table.to_csv())
        }
        ExportFormat::Json => Ok(serde_json::to_vec_pretty(answer).expect("answers serialize")),
    }
}
