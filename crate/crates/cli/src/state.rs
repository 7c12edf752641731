//! Read access to runs and attributions under a state directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use perceptbench_core::attribution::{AttributionRecord, AttributionStore};
use perceptbench_core::fsutil::read_json;
use perceptbench_core::pipeline::{PipelineError, RunResult, RunStore, StoredConfig, TaskOutcome, TraceRecord};

pub struct RunView {
    pub store: RunStore,
    pub stored: StoredConfig,
    pub result: RunResult,
    /// Whether `result.json` exists, i.e. the run finished.
    pub complete: bool,
}

impl RunView {
    pub fn run_id(&self) -> &str {
        &self.stored.config.run_id
    }

    /// The latest trace of every task under the run's current config.
    pub fn traces(&self) -> Result<BTreeMap<String, TraceRecord>, PipelineError> {
        Ok(self
            .store
            .traces()?
            .into_iter()
            .filter(|t| t.config_digest == self.stored.config_digest)
            .map(|t| (t.task_id.clone(), t))
            .collect())
    }

    pub fn sample_path(&self) -> PathBuf {
        self.store.dir().join("sample.json")
    }

    pub fn sample(&self) -> Result<Option<Vec<String>>> {
        let path = self.sample_path();
        if !path.is_file() {
            return Ok(None);
        }
        Ok(Some(read_json(&path)?))
    }
}

/// Opens a run; a run without `result.json` is summarized from whatever
/// predictions exist so far.
pub fn open_run(state_dir: &Path, run_id: &str) -> Result<RunView, PipelineError> {
    let store = RunStore::open(state_dir, run_id)?;
    let stored = store.config()?;
    let complete = store.result_path().is_file();
    let result = if complete {
        store.result()?
    } else {
        let outcomes = store
            .predictions()?
            .into_iter()
            .filter(|p| p.config_digest == stored.config_digest)
            .map(|p| TaskOutcome {
                task_id: p.task_id,
                verdict: p.verdict,
                parsed: p.parsed,
                failed_stage: p.failed_stage,
            })
            .collect();
        RunResult::from_outcomes(
            &stored.config.run_id,
            stored.config.config_id,
            stored.config.benchmark,
            &stored.config_digest,
            outcomes,
        )
    };
    Ok(RunView {
        store,
        stored,
        result,
        complete,
    })
}

/// Records for one run, one per task. With several annotators on the same
/// task an explicit `annotator` is required.
pub fn select_records(
    store: &AttributionStore,
    run_id: &str,
    annotator: Option<&str>,
) -> Result<Vec<AttributionRecord>> {
    let mut records = store.records_for_run(run_id)?;
    if let Some(a) = annotator {
        records.retain(|r| r.annotator == a);
        return Ok(records);
    }
    let mut seen = BTreeSet::new();
    if records.iter().any(|r| !seen.insert(r.task_id.as_str())) {
        let names: BTreeSet<&str> = records.iter().map(|r| r.annotator.as_str()).collect();
        bail!(
            "run {run_id} has records from several annotators ({}); choose one with --annotator",
            names.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    Ok(records)
}
