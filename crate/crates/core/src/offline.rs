//! Scripted reasoners for offline runs on synthetic Mini-ARC tasks.
//!
//! A script maps the digest of each reasoning (or one-stage) request to the
//! answer a simulated reasoner would give. The two-stage builders run the
//! real perception backend and the real prompt builder, so the digests match
//! what [`crate::pipeline::run_config`] later sends, and the simulated
//! reasoner only ever sees the grids recovered from the descriptions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::seed_from;
use crate::gateway::{ModelBackend, ScriptTable};
use crate::grid::Grid;
use crate::ingest::{rule_from_task_id, RuleKind};
use crate::perception::enrich::enrich_task;
use crate::perception::prompt::PerceptionPromptSpec;
use crate::perception::text::{parse_grid, serialize_grid};
use crate::pipeline::{enrich_options, one_stage_request, output_transform, reasoning_request, PredictOptions};
use crate::task::{BenchmarkKind, OutputDescription, Task, TaskInput, TaskOutput};

#[derive(Debug, Error)]
pub enum OfflineError {
    #[error("offline reasoners only handle Mini-ARC grid tasks, got {0}")]
    NotGrid(String),
    #[error("building prompt for {task}: {source}")]
    Prompt {
        task: String,
        #[source]
        source: std::io::Error,
    },
}

/// How the simulated reasoner picks its rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum ReasonerPolicy {
    /// States and applies the task's true synthetic rule (read from its id).
    ApplyTaskRule,
    /// Picks the candidate rule consistent with the most demonstrations.
    Induce,
    /// Always states and applies one rule.
    FixedRule { rule: RuleKind },
    /// Induces like [`ReasonerPolicy::Induce`] but, with probability
    /// `miss_rate` per task, misapplies the rule it found.
    Weak { miss_rate: f64, seed: u64 },
}

fn candidates() -> Vec<RuleKind> {
    let mut out = vec![RuleKind::Identity, RuleKind::HorizontalMirror, RuleKind::Rotate90];
    for a in 0..=9u8 {
        for b in a + 1..=9 {
            out.push(RuleKind::ColorSwap(a, b));
        }
    }
    out
}

/// The candidate consistent with the most demos; earlier candidates win ties.
pub fn induce_rule(demos: &[(Grid, Grid)]) -> RuleKind {
    let mut best = (0, RuleKind::Identity);
    for rule in candidates() {
        let hits = demos.iter().filter(|(i, o)| rule.apply(i) == *o).count();
        if hits > best.0 {
            best = (hits, rule);
        }
    }
    best.1
}

/// Rules that act identically on every grid compare equal.
pub fn same_rule(a: RuleKind, b: RuleKind) -> bool {
    let norm = |r: RuleKind| match r {
        RuleKind::ColorSwap(x, y) if x > y => RuleKind::ColorSwap(y, x),
        other => other,
    };
    norm(a) == norm(b)
}

/// Answer text of a simulated reasoner: a `Rule:` line then the grid.
/// `None` inputs stand for descriptions it could not read.
pub fn reasoner_answer(
    policy: ReasonerPolicy,
    task_id: &str,
    demos: &[Option<(Grid, Grid)>],
    test: Option<&Grid>,
) -> String {
    let readable: Vec<(Grid, Grid)> = demos.iter().flatten().cloned().collect();
    let rule = match policy {
        ReasonerPolicy::ApplyTaskRule => rule_from_task_id(task_id).unwrap_or_else(|| induce_rule(&readable)),
        ReasonerPolicy::Induce | ReasonerPolicy::Weak { .. } => induce_rule(&readable),
        ReasonerPolicy::FixedRule { rule } => rule,
    };
    let Some(test) = test else {
        return format!("Rule: {rule}\nI could not read the test input.");
    };
    let missed = match policy {
        ReasonerPolicy::Weak { miss_rate, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_from(&[b"weak", &seed.to_le_bytes(), task_id.as_bytes()]));
            rng.random::<f64>() < miss_rate
        }
        _ => false,
    };
    let answer = if missed {
        // Shape differs from any rule's output, so the miss is always wrong.
        Grid::filled(test.rows() + 1, test.cols(), 0).expect("small grid")
    } else {
        rule.apply(test)
    };
    format!("Rule: {rule}\nAnswer: {}", serialize_grid(&answer))
}

fn grid_task(task: &Task) -> Result<(), OfflineError> {
    if task.benchmark() == BenchmarkKind::MiniArc {
        Ok(())
    } else {
        Err(OfflineError::NotGrid(task.id().to_string()))
    }
}

/// Script for a one-stage reasoner that sees the true grids.
pub fn script_one_stage(
    tasks: &[Task],
    model: &str,
    opts: &PredictOptions,
    policy: ReasonerPolicy,
) -> Result<ScriptTable, OfflineError> {
    let mut table = ScriptTable::default();
    for task in tasks {
        grid_task(task)?;
        let request = one_stage_request(task.problem(), model, opts).map_err(|source| OfflineError::Prompt {
            task: task.id().to_string(),
            source,
        })?;
        let demos: Vec<Option<(Grid, Grid)>> = task
            .demos()
            .iter()
            .map(|d| match (&d.input, &d.output) {
                (TaskInput::Grid(i), TaskOutput::Grid(o)) => Some((i.clone(), o.clone())),
                _ => None,
            })
            .collect();
        let text = reasoner_answer(policy, task.id(), &demos, task.test_input().as_grid());
        table.insert(request.digest(), text);
    }
    Ok(table)
}

/// Script for a reasoner that only sees what `perception` described.
/// Tasks whose perception fails get no entry, so the run records them as
/// backend failures.
pub fn script_two_stage(
    tasks: &[Task],
    perception: &dyn ModelBackend,
    reasoning_model: &str,
    opts: &PredictOptions,
    policy: ReasonerPolicy,
) -> Result<ScriptTable, OfflineError> {
    let spec = PerceptionPromptSpec::for_benchmark(BenchmarkKind::MiniArc);
    let mut table = ScriptTable::default();
    for task in tasks {
        grid_task(task)?;
        let problem = task.problem();
        let enrichment = enrich_task(
            problem,
            &spec,
            perception,
            output_transform(problem, perception),
            enrich_options(opts),
        );
        let Ok(enriched) = enrichment.result else {
            log::warn!("{}: perception failed, leaving it unscripted", task.id());
            continue;
        };
        let read = |text: &str| parse_grid(text).ok();
        let demos: Vec<Option<(Grid, Grid)>> = enriched
            .demo_descriptions
            .iter()
            .map(|d| match &d.output {
                OutputDescription::Described(out) => read(&d.input.text).zip(read(&out.text)),
                OutputDescription::Identity => None,
            })
            .collect();
        let test = read(&enriched.test_input_desc.text);
        let request = reasoning_request(&enriched, reasoning_model, opts).map_err(|source| OfflineError::Prompt {
            task: task.id().to_string(),
            source,
        })?;
        table.insert(request.digest(), reasoner_answer(policy, task.id(), &demos, test.as_ref()));
    }
    Ok(table)
}
