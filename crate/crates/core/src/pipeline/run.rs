//! Evaluates every task under one configuration.

use std::collections::HashMap;
use std::path::Path;
use std::sync::mpsc;

use rayon::prelude::*;

use crate::gateway::{Backend, ModelBackend};
use crate::perception::prompt::PerceptionPromptSpec;
use crate::perception::{input_image, output_image};
use crate::task::{Prediction, Task};

use super::config::{Mode, RunConfig};
use super::predict::{predict_one_stage, predict_two_stage};
use super::result::{RunResult, TaskOutcome};
use super::score::score;
use super::store::{PredictionRecord, RunStore, TraceRecord};
use super::PipelineError;

/// Builds the configured backends and runs under `{state_dir}/runs/{run_id}`.
pub fn run_config(config: &RunConfig, tasks: &[Task], state_dir: &Path) -> Result<RunResult, PipelineError> {
    config.validate()?;
    let reasoning = Backend::from_config(config.reasoning.clone())?;
    let perception = config.perception.clone().map(Backend::from_config).transpose()?;
    let store = RunStore::new(state_dir, &config.run_id);
    run_with_backends(
        config,
        tasks,
        perception.as_ref().map(|b| b as &dyn ModelBackend),
        &reasoning,
        Some(&store),
    )
}

/// Runs `tasks` with explicit backends. With a store, predictions and traces
/// are appended as tasks finish, tasks already predicted under the same
/// config digest are skipped, and `result.json` is written at the end.
pub fn run_with_backends(
    config: &RunConfig,
    tasks: &[Task],
    perception: Option<&dyn ModelBackend>,
    reasoning: &dyn ModelBackend,
    store: Option<&RunStore>,
) -> Result<RunResult, PipelineError> {
    config.validate()?;
    if let Some(task) = tasks.iter().find(|t| t.benchmark() != config.benchmark) {
        return Err(PipelineError::Config(format!(
            "task {} is {} but the run is {}",
            task.id(),
            task.benchmark(),
            config.benchmark
        )));
    }
    if config.mode == Mode::TwoStage && perception.is_none() {
        return Err(PipelineError::Config("two-stage run without a perception backend".into()));
    }
    let digest = config.digest();
    let mut done: HashMap<String, PredictionRecord> = HashMap::new();
    if let Some(store) = store {
        store.prepare(config, tasks)?;
        for rec in store.predictions()? {
            if rec.config_digest == digest {
                done.insert(rec.task_id.clone(), rec);
            }
        }
    }
    let pending: Vec<&Task> = tasks.iter().filter(|t| !done.contains_key(t.id())).collect();
    log::info!(
        "run {}: {} tasks, {} already predicted, {} to go",
        config.run_id,
        tasks.len(),
        tasks.len() - pending.len(),
        pending.len()
    );

    let spec = PerceptionPromptSpec::for_benchmark(config.benchmark);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?;

    let fresh: Vec<PredictionRecord> = std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(PredictionRecord, TraceRecord)>();
        let writer = scope.spawn(move || -> Result<(), PipelineError> {
            let mut first_error = None;
            for (prediction, trace) in rx {
                if let Some(store) = store {
                    if let Err(e) = store.append(&prediction, &trace) {
                        log::error!("persisting {}: {e}", prediction.task_id);
                        first_error.get_or_insert(e);
                    }
                }
            }
            first_error.map_or(Ok(()), Err)
        });
        let records: Result<Vec<PredictionRecord>, PipelineError> = pool.install(|| {
            pending
                .par_iter()
                .map_with(tx, |tx, task| {
                    let prediction = match config.mode {
                        Mode::OneStage => {
                            predict_one_stage(task.problem(), reasoning, &config.options, config.config_id.as_str())
                        }
                        Mode::TwoStage => predict_two_stage(
                            task.problem(),
                            &spec,
                            perception.expect("checked above"),
                            reasoning,
                            &config.options,
                            config.config_id.as_str(),
                        ),
                    };
                    if let Some(store) = store {
                        save_images(store, task, config.options.cell_px)?;
                    }
                    let (record, trace) = records_for(config, &digest, task, prediction);
                    log::debug!("{}: correct={}", record.task_id, record.verdict.correct);
                    // The writer only stops after every sender is dropped.
                    tx.send((record.clone(), trace)).expect("writer outlives workers");
                    Ok(record)
                })
                .collect()
        });
        let written = writer.join().expect("writer thread panicked");
        let records = records?;
        written.map(|_| records)
    })?;

    for rec in fresh {
        done.insert(rec.task_id.clone(), rec);
    }
    let outcomes = tasks
        .iter()
        .map(|t| {
            let rec = &done[t.id()];
            TaskOutcome {
                task_id: rec.task_id.clone(),
                verdict: rec.verdict,
                parsed: rec.parsed.clone(),
                failed_stage: rec.failed_stage,
            }
        })
        .collect();
    let result = RunResult::from_outcomes(&config.run_id, config.config_id, config.benchmark, &digest, outcomes);
    if let Some(store) = store {
        store.write_result(&result)?;
    }
    log::info!(
        "run {}: {}/{} correct ({}%)",
        config.run_id,
        result.counts.correct,
        result.counts.total,
        result.success_rate
    );
    Ok(result)
}

fn records_for(config: &RunConfig, digest: &str, task: &Task, prediction: Prediction) -> (PredictionRecord, TraceRecord) {
    let verdict = score(&prediction, task.gold().reveal());
    let record = PredictionRecord {
        task_id: prediction.task_id,
        config_id: config.config_id,
        config_digest: digest.to_string(),
        raw_text: prediction.raw_text,
        parsed: prediction.parsed,
        verdict,
        failed_stage: prediction.failed_stage,
    };
    let trace = TraceRecord {
        task_id: record.task_id.clone(),
        config_id: config.config_id,
        config_digest: digest.to_string(),
        entries: prediction.trace,
    };
    (record, trace)
}

/// Stores every image of the task as the models saw it.
fn save_images(store: &RunStore, task: &Task, cell_px: u32) -> Result<(), PipelineError> {
    let io = |e| PipelineError::io(store.dir(), e);
    for demo in task.demos() {
        store.save_image(&input_image(&demo.input, cell_px).map_err(io)?)?;
        if let Some(img) = output_image(&demo.output, cell_px) {
            store.save_image(&img)?;
        }
    }
    store.save_image(&input_image(task.test_input(), cell_px).map_err(io)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{BackendConfig, ScriptTable};
    use crate::ingest::{gen_synthetic, RuleKind, SyntheticRule};
    use crate::pipeline::config::ConfigId;
    use crate::pipeline::predict::one_stage_request;
    use crate::task::BenchmarkKind;

    #[test]
    fn constant_reasoner_scores_zero_and_resume_is_stable() {
        let tasks = gen_synthetic(
            SyntheticRule {
                kind: RuleKind::HorizontalMirror,
                seed: 3,
            },
            2,
            (3, 3),
            6,
        );
        let mut config = RunConfig::one_stage(
            "const",
            ConfigId::A,
            BenchmarkKind::MiniArc,
            BackendConfig::scripted("r", ScriptTable::default()),
        );
        let mut table = ScriptTable::default();
        for t in &tasks {
            let req = one_stage_request(t.problem(), "r", &config.options).unwrap();
            table.insert(req.digest(), "[[0]]");
        }
        config.reasoning = BackendConfig::scripted("r", table);
        let dir = tempfile::tempdir().unwrap();
        let first = run_config(&config, &tasks, dir.path()).unwrap();
        assert_eq!(first.success_rate, "0.00");
        assert_eq!(first.counts.total, 6);
        for t in &tasks {
            assert_eq!(t.gold().reads(), 1);
        }
        let store = RunStore::open(dir.path(), "const").unwrap();
        assert_eq!(store.predictions().unwrap().len(), 6);
        assert_eq!(store.traces().unwrap().len(), 6);

        // Rerun: everything is skipped and the result is identical.
        let second = run_config(&config, &tasks, dir.path()).unwrap();
        assert_eq!(first, second);
        assert_eq!(store.predictions().unwrap().len(), 6);
    }

    #[test]
    fn changed_config_is_refused() {
        let tasks = gen_synthetic(
            SyntheticRule {
                kind: RuleKind::Identity,
                seed: 0,
            },
            1,
            (2, 2),
            1,
        );
        let config = RunConfig::one_stage(
            "x",
            ConfigId::A,
            BenchmarkKind::MiniArc,
            BackendConfig::scripted("r", ScriptTable::default()),
        );
        let dir = tempfile::tempdir().unwrap();
        run_config(&config, &tasks, dir.path()).unwrap();
        let mut other = config.clone();
        other.seed = 1;
        assert!(matches!(
            run_config(&other, &tasks, dir.path()),
            Err(PipelineError::ConfigChanged { .. })
        ));
    }
}
