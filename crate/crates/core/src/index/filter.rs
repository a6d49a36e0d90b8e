use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::IndexError;
use crate::ingest::{ChunkMetadata, DocType};

/// Inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub from: NaiveDate,
    pub to: NaiveDate,
}

/// Conjunction of the present clauses; an empty filter matches everything.
/// A chunk without a date never satisfies a date range.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetadataFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_type_in: Option<BTreeSet<DocType>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_range: Option<DateRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags_any: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id_in: Option<BTreeSet<String>>,
}

impl MetadataFilter {
    pub fn validate(&self) -> Result<(), IndexError> {
        match self.date_range {
            Some(r) if r.from > r.to => Err(IndexError::InvalidFilter(format!("date range {} > {}", r.from, r.to))),
            _ => Ok(()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self == &MetadataFilter::default()
    }

    pub fn matches(&self, m: &ChunkMetadata) -> bool {
        if let Some(types) = &self.doc_type_in {
            if !types.contains(&m.doc_type) {
                return false;
            }
        }
        if let Some(r) = &self.date_range {
            match m.date {
                Some(d) if r.from <= d && d <= r.to => {}
                _ => return false,
            }
        }
        if let Some(tags) = &self.tags_any {
            if tags.is_disjoint(&m.tags) {
                return false;
            }
        }
        if let Some(ids) = &self.doc_id_in {
            if !ids.contains(&m.doc_id) {
                return false;
            }
        }
        true
    }
}
