//! Per-benchmark comparison of two runs over the same task set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::decimal;
use crate::task::BenchmarkKind;

use super::config::ConfigId;
use super::result::RunResult;
use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateCell {
    pub run_id: String,
    pub config_id: ConfigId,
    pub correct: u64,
    pub total: u64,
    pub rate: String,
}

/// Success rates of two runs and their difference in percentage points,
/// computed from exact counts and rendered to two decimals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub benchmark: BenchmarkKind,
    pub a: RateCell,
    pub b: RateCell,
    pub delta: String,
}

fn cell(run: &RunResult) -> RateCell {
    RateCell {
        run_id: run.run_id.clone(),
        config_id: run.config_id,
        correct: run.counts.correct,
        total: run.counts.total,
        rate: run.success_rate.clone(),
    }
}

pub fn compare_runs(a: &RunResult, b: &RunResult) -> Result<DeltaReport, PipelineError> {
    if a.benchmark != b.benchmark {
        return Err(PipelineError::Config(format!(
            "cannot compare a {} run with a {} run",
            a.benchmark, b.benchmark
        )));
    }
    let ids_a: BTreeSet<&str> = a.task_ids().collect();
    let ids_b: BTreeSet<&str> = b.task_ids().collect();
    if ids_a != ids_b {
        return Err(PipelineError::TaskSetMismatch {
            only_a: ids_a.difference(&ids_b).map(|s| s.to_string()).collect(),
            only_b: ids_b.difference(&ids_a).map(|s| s.to_string()).collect(),
        });
    }
    let (ca, ta) = (a.counts.correct as i128, a.counts.total as i128);
    let (cb, tb) = (b.counts.correct as i128, b.counts.total as i128);
    let delta = if ta == 0 {
        "0.00".to_string()
    } else {
        // b/tb - a/ta over the common denominator ta*tb.
        decimal::signed_ratio(100 * (cb * ta - ca * tb), ta * tb, 2)
    };
    Ok(DeltaReport {
        benchmark: a.benchmark,
        a: cell(a),
        b: cell(b),
        delta,
    })
}

/// Markdown table with one row per report.
pub fn delta_markdown(reports: &[DeltaReport]) -> String {
    let mut out = String::from("| Benchmark | a | b | Δ |\n|---|---:|---:|---:|\n");
    for r in reports {
        out.push_str(&format!(
            "| {} | {} ({}) | {} ({}) | {} |\n",
            r.benchmark, r.a.rate, r.a.config_id, r.b.rate, r.b.config_id, r.delta
        ));
    }
    out
}
