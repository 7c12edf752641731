//! Combined report for one run or a pair of runs.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use perceptbench_core::attribution::{
    flow, tally, tally_markdown, transition, transition_markdown, AttributionStore, Flow, TallyTable, TransitionMatrix,
};
use perceptbench_core::pipeline::{compare_runs, delta_markdown, Counts, DeltaReport};
use perceptbench_core::task::BenchmarkKind;
use serde::Serialize;

use crate::commands::emit;
use crate::state::{open_run, select_records, RunView};
use crate::OutputFormat;

#[derive(Debug, Serialize)]
pub struct RunRates {
    pub run_id: String,
    pub config_id: String,
    pub benchmark: BenchmarkKind,
    pub complete: bool,
    pub counts: Counts,
    pub success_rate: String,
}

#[derive(Debug, Serialize)]
pub struct ReportBundle {
    pub runs: Vec<RunRates>,
    pub delta: Option<DeltaReport>,
    pub tallies: Vec<TallyTable>,
    pub transition: Option<TransitionMatrix>,
    pub flow: Option<Flow>,
}

fn rates(view: &RunView) -> RunRates {
    RunRates {
        run_id: view.run_id().to_string(),
        config_id: view.result.config_id.to_string(),
        benchmark: view.result.benchmark,
        complete: view.complete,
        counts: view.result.counts,
        success_rate: view.result.success_rate.clone(),
    }
}

pub fn build(state_dir: &Path, run: &str, other: Option<&str>, annotator: Option<&str>) -> Result<ReportBundle> {
    let store = AttributionStore::new(state_dir);
    let first = open_run(state_dir, run)?;
    let mut views = vec![first];
    if let Some(b) = other {
        views.push(open_run(state_dir, b)?);
    }
    let delta = match views.as_slice() {
        [a, b] => Some(compare_runs(&a.result, &b.result)?),
        _ => None,
    };
    let mut records = Vec::new();
    for view in &views {
        records.push(select_records(&store, view.run_id(), annotator)?);
    }
    let tallies = tally(&records.concat());
    let transition = match records.as_slice() {
        [a, b] if !a.is_empty() && !b.is_empty() => Some(transition(a, b)?),
        _ => None,
    };
    Ok(ReportBundle {
        runs: views.iter().map(rates).collect(),
        delta,
        tallies,
        flow: transition.as_ref().map(flow),
        transition,
    })
}

impl ReportBundle {
    /// JSON with object keys sorted, so equal reports are equal bytes.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Report\n\n## Runs\n\n| run | config | benchmark | correct | total | success rate |\n|---|---|---|---:|---:|---:|\n");
        for r in &self.runs {
            let partial = if r.complete { "" } else { " (partial)" };
            let _ = writeln!(
                out,
                "| {}{partial} | {} | {} | {} | {} | {} |",
                r.run_id, r.config_id, r.benchmark, r.counts.correct, r.counts.total, r.success_rate
            );
        }
        if let Some(delta) = &self.delta {
            out.push_str("\n## Difference\n\n");
            out.push_str(&delta_markdown(std::slice::from_ref(delta)));
        }
        if !self.tallies.is_empty() {
            out.push_str("\n## Error attribution\n\n");
            out.push_str(&tally_markdown(&self.tallies));
        }
        if let Some(matrix) = &self.transition {
            out.push_str("\n## Transitions\n\n");
            out.push_str(&transition_markdown(matrix));
        }
        out
    }
}

pub fn report(state_dir: &Path, run: &str, other: Option<&str>, annotator: Option<&str>, format: OutputFormat) -> Result<()> {
    let bundle = build(state_dir, run, other, annotator)?;
    match format {
        OutputFormat::Json => emit(&bundle.to_json()?),
        OutputFormat::Md => emit(&bundle.to_markdown()),
    }
}
