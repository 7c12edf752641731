//! Per-configuration error tallies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decimal;
use crate::pipeline::ConfigId;

use super::record::{AttributionRecord, ErrorCategory};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyRow {
    pub category: ErrorCategory,
    pub count: u64,
    /// Share of all errors, one decimal, half-up.
    pub percent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyTable {
    pub run_id: String,
    pub config_id: ConfigId,
    pub records: u64,
    pub correct: u64,
    pub total_errors: u64,
    /// The four error categories in step order; empty when there are no errors.
    pub rows: Vec<TallyRow>,
}

impl TallyTable {
    /// Table from error counts in step order.
    pub fn from_counts(run_id: &str, config_id: ConfigId, correct: u64, errors: [u64; 4]) -> TallyTable {
        let total: u64 = errors.iter().sum();
        let rows = if total == 0 {
            Vec::new()
        } else {
            ErrorCategory::ERRORS
                .iter()
                .zip(errors)
                .map(|(c, n)| TallyRow {
                    category: *c,
                    count: n,
                    percent: decimal::percent(n as i128, total as i128, 1),
                })
                .collect()
        };
        TallyTable {
            run_id: run_id.to_string(),
            config_id,
            records: correct + total,
            correct,
            total_errors: total,
            rows,
        }
    }

    pub fn count(&self, category: ErrorCategory) -> u64 {
        match category {
            ErrorCategory::Correct => self.correct,
            c => self.rows.iter().find(|r| r.category == c).map_or(0, |r| r.count),
        }
    }
}

/// One table per (run, config), sorted.
pub fn tally(records: &[AttributionRecord]) -> Vec<TallyTable> {
    let mut groups: BTreeMap<(String, ConfigId), (u64, [u64; 4])> = BTreeMap::new();
    for r in records {
        let entry = groups.entry((r.run_id.clone(), r.config_id)).or_default();
        match r.category.step() {
            None => entry.0 += 1,
            Some(k) => entry.1[k] += 1,
        }
    }
    groups
        .into_iter()
        .map(|((run, config), (correct, errors))| TallyTable::from_counts(&run, config, correct, errors))
        .collect()
}

/// Markdown table with one column per tally.
pub fn tally_markdown(tables: &[TallyTable]) -> String {
    let mut out = String::from("| Error type |");
    for t in tables {
        out.push_str(&format!(" {} ({}) |", t.run_id, t.config_id));
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(tables.len()));
    out.push('\n');
    for c in ErrorCategory::ERRORS {
        out.push_str(&format!("| {} |", c.title()));
        for t in tables {
            match t.rows.iter().find(|r| r.category == c) {
                Some(r) => out.push_str(&format!(" {} ({}%) |", r.count, r.percent)),
                None => out.push_str(" 0 |"),
            }
        }
        out.push('\n');
    }
    out.push_str("| Total errors |");
    for t in tables {
        out.push_str(&format!(" {} |", t.total_errors));
    }
    out.push('\n');
    out
}
