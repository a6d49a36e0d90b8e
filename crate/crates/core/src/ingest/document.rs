use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    PolicyReport,
    HydrologicalModel,
    EflowAssessment,
    #[default]
    Other,
}

impl DocType {
    pub fn as_str(self) -> &'static str {
        match self {
            DocType::PolicyReport => "policy_report",
            DocType::HydrologicalModel => "hydrological_model",
            DocType::EflowAssessment => "eflow_assessment",
            DocType::Other => "other",
        }
    }
}

impl std::str::FromStr for DocType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "policy_report" => Ok(DocType::PolicyReport),
            "hydrological_model" => Ok(DocType::HydrologicalModel),
            "eflow_assessment" => Ok(DocType::EflowAssessment),
            "other" => Ok(DocType::Other),
            other => Err(format!("unknown doc_type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextFormat {
    Txt,
    Md,
}

/// Caller-supplied metadata; everything but the id is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub doc_id: String,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub doc_type: Option<DocType>,
    /// ISO-8601 calendar date; anything else is kept as a tag.
    #[serde(default)]
    pub date: Option<String>,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl DocumentMeta {
    pub fn new(doc_id: &str) -> Self {
        Self { doc_id: doc_id.into(), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub doc_id: String,
    pub title: String,
    pub doc_type: DocType,
    pub date: Option<NaiveDate>,
    pub tags: BTreeSet<String>,
    pub body: String,
}

impl SourceDocument {
    /// Text of `[start, end)` in character offsets.
    pub fn slice_chars(&self, span: [usize; 2]) -> Option<String> {
        if span[0] > span[1] {
            return None;
        }
        let text: String = self.body.chars().skip(span[0]).take(span[1] - span[0]).collect();
        (text.chars().count() == span[1] - span[0]).then_some(text)
    }
}

fn normalize_body(text: &str) -> String {
    text.replace("\r\n", "\n")
        .split('\n')
        .map(str::trim_end)
        .collect::<Vec<_>>()
        .join("\n")
}

fn markdown_title(body: &str) -> Option<String> {
    let first = body.lines().find(|l| !l.trim().is_empty())?;
    let title = first.trim_start().strip_prefix("# ")?.trim();
    (!title.is_empty()).then(|| title.to_owned())
}

pub fn parse_document(raw: &[u8], format: TextFormat, meta: DocumentMeta) -> Result<SourceDocument, IngestError> {
    let text = std::str::from_utf8(raw)?;
    if meta.doc_id.trim().is_empty() {
        return Err(IngestError::MissingDocId);
    }
    let body = normalize_body(text);
    if body.trim().is_empty() {
        return Err(IngestError::EmptyDocument(meta.doc_id));
    }
    let mut tags: BTreeSet<String> = meta.tags.into_iter().collect();
    let date = match meta.date {
        Some(d) => match NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d") {
            Ok(date) => Some(date),
            Err(_) => {
                tags.insert(d);
                None
            }
        },
        None => None,
    };
    let title = meta
        .title
        .filter(|t| !t.trim().is_empty())
        .or_else(|| if format == TextFormat::Md { markdown_title(&body) } else { None })
        .unwrap_or_else(|| meta.doc_id.clone());
    Ok(SourceDocument { doc_id: meta.doc_id, title, doc_type: meta.doc_type.unwrap_or_default(), date, tags, body })
}
