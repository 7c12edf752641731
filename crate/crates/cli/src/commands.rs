//! Dataset, script and run commands.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use perceptbench_core::fsutil::write_jsonl;
use perceptbench_core::gateway::{Backend, BackendKind};
use perceptbench_core::ingest::{self, gen_synthetic, DatasetManifest, RuleKind, SyntheticRule};
use perceptbench_core::offline::{script_one_stage, script_two_stage, ReasonerPolicy};
use perceptbench_core::pipeline::{compare_runs, delta_markdown, run_config, Mode};
use perceptbench_core::task::{BenchmarkKind, Task};
use serde::Serialize;

use crate::manifest::Manifest;
use crate::state::open_run;
use crate::OutputFormat;

/// Writes to stdout, returning write errors instead of panicking on them.
pub fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

pub fn ingest(benchmark: BenchmarkKind, root: &Path, out: &Path, split: &str) -> Result<()> {
    let tasks = ingest::load(benchmark, root)?;
    write_jsonl(out, &tasks).with_context(|| format!("writing {}", out.display()))?;
    print_json(&DatasetManifest::new(benchmark, root, split, &tasks))
}

pub struct SynthArgs {
    pub rules: Vec<RuleKind>,
    pub seed: u64,
    pub count: usize,
    pub demos: usize,
    pub rows: usize,
    pub cols: usize,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SynthSummary {
    out: PathBuf,
    tasks: usize,
    rules: Vec<String>,
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    if args.rules.is_empty() {
        bail!("give at least one --rule");
    }
    if args.demos == 0 || args.rows == 0 || args.cols == 0 {
        bail!("--demos, --rows and --cols must be positive");
    }
    let tasks: Vec<Task> = args
        .rules
        .iter()
        .enumerate()
        .flat_map(|(i, kind)| {
            let rule = SyntheticRule {
                kind: *kind,
                seed: args.seed.wrapping_add(i as u64),
            };
            gen_synthetic(rule, args.demos, (args.rows, args.cols), args.count)
        })
        .collect();
    write_jsonl(&args.out, &tasks).with_context(|| format!("writing {}", args.out.display()))?;
    print_json(&SynthSummary {
        out: args.out.clone(),
        tasks: tasks.len(),
        rules: args.rules.iter().map(ToString::to_string).collect(),
    })
}

/// `induce`, `apply-task-rule`, `fixed:<rule>` or `weak:<miss-rate>:<seed>`.
pub fn parse_policy(s: &str) -> Result<ReasonerPolicy, String> {
    let mut parts = s.split(':');
    let policy = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some("induce"), None, None, None) => ReasonerPolicy::Induce,
        (Some("apply-task-rule"), None, None, None) => ReasonerPolicy::ApplyTaskRule,
        (Some("fixed"), Some(rule), None, None) => ReasonerPolicy::FixedRule { rule: rule.parse()? },
        (Some("weak"), Some(rate), Some(seed), None) => {
            let miss_rate: f64 = rate.parse().map_err(|_| format!("bad miss rate `{rate}`"))?;
            if !(0.0..=1.0).contains(&miss_rate) {
                return Err(format!("miss rate {miss_rate} is outside [0, 1]"));
            }
            let seed = seed.parse().map_err(|_| format!("bad seed `{seed}`"))?;
            ReasonerPolicy::Weak { miss_rate, seed }
        }
        _ => return Err(format!("unknown policy `{s}`; use induce, apply-task-rule, fixed:<rule> or weak:<rate>:<seed>")),
    };
    Ok(policy)
}

#[derive(Serialize)]
struct ScriptSummary {
    script_file: PathBuf,
    entries: usize,
    tasks: usize,
}

/// Writes the offline reasoner's answers to the manifest's `script_file`.
pub fn synth_script(manifest_path: &Path, policy: ReasonerPolicy) -> Result<()> {
    let manifest = Manifest::read(manifest_path)?;
    let reasoning = &manifest.reasoning;
    if reasoning.kind != BackendKind::Scripted {
        bail!("the manifest's reasoning backend is `{:?}`, not scripted", reasoning.kind);
    }
    let Some(script_file) = reasoning.script_file.clone() else {
        bail!("the manifest's reasoning backend has no `script_file` to write");
    };
    let (tasks, _) = manifest.load_tasks()?;
    let model = reasoning.model_name();
    let table = match (manifest.config.mode(), &manifest.perception) {
        (Mode::OneStage, _) => script_one_stage(&tasks, model, &manifest.options, policy)?,
        (Mode::TwoStage, Some(perception)) => {
            let probe = Backend::from_config(perception.clone())?;
            script_two_stage(&tasks, &probe, model, &manifest.options, policy)?
        }
        (Mode::TwoStage, None) => bail!("config {} needs a [perception] backend", manifest.config),
    };
    if let Some(parent) = script_file.parent() {
        std::fs::create_dir_all(parent)?;
    }
    table.save(&script_file).with_context(|| format!("writing {}", script_file.display()))?;
    print_json(&ScriptSummary {
        script_file,
        entries: table.len(),
        tasks: tasks.len(),
    })
}

fn resolve_state_dir(flag: Option<PathBuf>, manifest: Option<PathBuf>) -> PathBuf {
    flag.or(manifest).unwrap_or_else(|| PathBuf::from("state"))
}

#[derive(Serialize)]
struct RunSummary<'a> {
    run_id: &'a str,
    config_id: String,
    benchmark: BenchmarkKind,
    config_digest: &'a str,
    counts: perceptbench_core::pipeline::Counts,
    success_rate: &'a str,
    result_file: PathBuf,
}

pub fn run(manifest_path: &Path, state_flag: Option<PathBuf>) -> Result<()> {
    let loaded = Manifest::load(manifest_path)?;
    let state_dir = resolve_state_dir(state_flag, loaded.state_dir);
    let result = run_config(&loaded.config, &loaded.tasks, &state_dir)?;
    let view = open_run(&state_dir, &result.run_id)?;
    print_json(&RunSummary {
        run_id: &result.run_id,
        config_id: result.config_id.to_string(),
        benchmark: result.benchmark,
        config_digest: &result.config_digest,
        counts: result.counts,
        success_rate: &result.success_rate,
        result_file: view.store.result_path(),
    })
}

pub fn compare(state_dir: &Path, a: &str, b: &str, format: OutputFormat) -> Result<()> {
    let run_a = open_run(state_dir, a)?;
    let run_b = open_run(state_dir, b)?;
    for run in [&run_a, &run_b] {
        if !run.complete {
            log::warn!("run {} has not finished; comparing its partial predictions", run.run_id());
        }
    }
    let report = compare_runs(&run_a.result, &run_b.result)?;
    match format {
        OutputFormat::Json => print_json(&report),
        OutputFormat::Md => emit(&delta_markdown(std::slice::from_ref(&report))),
    }
}
