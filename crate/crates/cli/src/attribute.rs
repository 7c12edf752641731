//! `attribute` subcommands: sampling, oracle attribution, tallies and flows.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use perceptbench_core::attribution::{
    attribute_trace, flow, sample_tasks, tally, tally_markdown, transition, transition_markdown, AttributionStore,
    TransitionMatrix,
};
use perceptbench_core::fsutil::write_json;
use serde::Serialize;

use crate::commands::{emit, print_json};
use crate::state::{open_run, select_records};
use crate::OutputFormat;

#[derive(Serialize)]
struct SampleSummary<'a> {
    run_id: &'a str,
    seed: u64,
    tasks: &'a [String],
}

pub fn sample(state_dir: &Path, run_id: &str, n: usize, seed: u64) -> Result<()> {
    let view = open_run(state_dir, run_id)?;
    let ids: Vec<&str> = view.result.task_ids().collect();
    let picked = sample_tasks(&ids, n, seed)?;
    write_json(&view.sample_path(), &picked).with_context(|| format!("writing {}", view.sample_path().display()))?;
    print_json(&SampleSummary {
        run_id,
        seed,
        tasks: &picked,
    })
}

#[derive(Serialize)]
struct AutoSummary {
    run_id: String,
    attributed: usize,
    skipped: Vec<String>,
}

/// Attributes the run's sample (or every task with `all`) from stored traces.
pub fn auto(state_dir: &Path, run_id: &str, all: bool) -> Result<()> {
    let view = open_run(state_dir, run_id)?;
    let tasks = view.store.tasks()?;
    let traces = view.traces()?;
    let wanted: Vec<String> = match view.sample()? {
        Some(ids) if !all => ids,
        _ => view.result.task_ids().map(str::to_string).collect(),
    };
    let store = AttributionStore::new(state_dir);
    let mut summary = AutoSummary {
        run_id: run_id.to_string(),
        attributed: 0,
        skipped: Vec::new(),
    };
    for id in &wanted {
        let task = tasks
            .iter()
            .find(|t| t.id() == id)
            .ok_or_else(|| anyhow!("task {id} is not part of run {run_id}"))?;
        let (Some(trace), Some(verdict)) = (traces.get(id), view.result.verdict_of(id)) else {
            log::warn!("{id}: no prediction yet, skipping");
            summary.skipped.push(id.clone());
            continue;
        };
        let record = attribute_trace(task, &trace.entries, verdict, run_id, view.stored.config.config_id)?;
        store.submit(record, &verdict)?;
        summary.attributed += 1;
    }
    print_json(&summary)
}

pub fn tally_cmd(state_dir: &Path, run_id: &str, annotator: Option<&str>, format: OutputFormat) -> Result<()> {
    open_run(state_dir, run_id)?;
    let records = select_records(&AttributionStore::new(state_dir), run_id, annotator)?;
    let tables = tally(&records);
    match format {
        OutputFormat::Json => print_json(&tables),
        OutputFormat::Md => emit(&tally_markdown(&tables)),
    }
}

pub fn transition_between(state_dir: &Path, a: &str, b: &str, annotator: Option<&str>) -> Result<TransitionMatrix> {
    open_run(state_dir, a)?;
    open_run(state_dir, b)?;
    let store = AttributionStore::new(state_dir);
    let records_a = select_records(&store, a, annotator)?;
    let records_b = select_records(&store, b, annotator)?;
    Ok(transition(&records_a, &records_b)?)
}

#[derive(Serialize)]
pub struct FlowReport {
    pub matrix: TransitionMatrix,
    pub flow: perceptbench_core::attribution::Flow,
}

pub fn flow_cmd(state_dir: &Path, a: &str, b: &str, annotator: Option<&str>, format: OutputFormat) -> Result<()> {
    let matrix = transition_between(state_dir, a, b, annotator)?;
    match format {
        OutputFormat::Json => print_json(&FlowReport {
            flow: flow(&matrix),
            matrix,
        }),
        OutputFormat::Md => emit(&transition_markdown(&matrix)),
    }
}
