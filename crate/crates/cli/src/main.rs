//! `perceptbench`: ingest benchmarks, run configurations, attribute errors
//! and serve the annotation API.

mod attribute;
mod commands;
mod manifest;
mod report;
mod serve;
mod state;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use perceptbench_core::ingest::RuleKind;
use perceptbench_core::offline::ReasonerPolicy;
use perceptbench_core::task::BenchmarkKind;

use commands::SynthArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Md,
}

#[derive(Parser)]
#[command(name = "perceptbench", version, about = "Perception-augmented evaluation of visual reasoning models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct StateArg {
    /// Directory holding runs and attributions.
    #[arg(long, env = "PERCEPTBENCH_STATE", default_value = "state")]
    state_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Load a benchmark from its native layout into a canonical task file.
    Ingest {
        #[arg(long)]
        benchmark: BenchmarkKind,
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "eval")]
        split: String,
    },
    /// Generate synthetic grid tasks with known rules.
    Synth {
        /// identity, hmirror, rot90 or colorswap-A-B; repeat for several rules.
        #[arg(long = "rule", required = true)]
        rules: Vec<RuleKind>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tasks per rule.
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        demos: usize,
        #[arg(long, default_value_t = 4)]
        rows: usize,
        #[arg(long, default_value_t = 4)]
        cols: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precompute an offline reasoner's answers into the manifest's script file.
    SynthScript {
        #[arg(long)]
        manifest: PathBuf,
        /// induce, apply-task-rule, fixed:<rule> or weak:<miss-rate>:<seed>.
        #[arg(long, default_value = "induce", value_parser = commands::parse_policy)]
        policy: ReasonerPolicy,
    },
    /// Run (or resume) the configuration described by a manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Overrides the manifest's state_dir.
        #[arg(long, env = "PERCEPTBENCH_STATE")]
        state_dir: Option<PathBuf>,
    },
    /// Success rates of two runs and their difference.
    Compare {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[command(flatten)]
        state: StateArg,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Error attribution.
    #[command(subcommand)]
    Attribute(AttributeCommand),
    /// Rates, difference, tallies and transitions in one document.
    Report {
        #[arg(long)]
        run: String,
        /// Second run to compare against.
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        annotator: Option<String>,
        #[command(flatten)]
        state: StateArg,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Serve the annotation API.
    Serve {
        #[command(flatten)]
        state: StateArg,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Show gold outputs before an annotator has submitted a record.
        #[arg(long)]
        no_blind: bool,
    },
}

#[derive(Subcommand)]
enum AttributeCommand {
    /// Draw a seeded sample of a run's tasks for annotation.
    Sample {
        #[arg(long)]
        run: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        state: StateArg,
    },
    /// Attribute synthetic tasks automatically from their stored traces.
    Auto {
        #[arg(long)]
        run: String,
        /// Attribute every task instead of the sample.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        state: StateArg,
    },
    /// Error tally of one run.
    Tally {
        #[arg(long)]
        run: String,
        #[arg(long)]
        annotator: Option<String>,
        #[command(flatten)]
        state: StateArg,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// How each task's category moved between two runs.
    Flow {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        annotator: Option<String>,
        #[command(flatten)]
        state: StateArg,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest {
            benchmark,
            root,
            out,
            split,
        } => commands::ingest(benchmark, &root, &out, &split),
        Command::Synth {
            rules,
            seed,
            count,
            demos,
            rows,
            cols,
            out,
        } => commands::synth(&SynthArgs {
            rules,
            seed,
            count,
            demos,
            rows,
            cols,
            out,
        }),
        Command::SynthScript { manifest, policy } => commands::synth_script(&manifest, policy),
        Command::Run { manifest, state_dir } => commands::run(&manifest, state_dir),
        Command::Compare { a, b, state, format } => commands::compare(&state.state_dir, &a, &b, format),
        Command::Attribute(cmd) => match cmd {
            AttributeCommand::Sample { run, n, seed, state } => attribute::sample(&state.state_dir, &run, n, seed),
            AttributeCommand::Auto { run, all, state } => attribute::auto(&state.state_dir, &run, all),
            AttributeCommand::Tally {
                run,
                annotator,
                state,
                format,
            } => attribute::tally_cmd(&state.state_dir, &run, annotator.as_deref(), format),
            AttributeCommand::Flow {
                a,
                b,
                annotator,
                state,
                format,
            } => attribute::flow_cmd(&state.state_dir, &a, &b, annotator.as_deref(), format),
        },
        Command::Report {
            run,
            b,
            annotator,
            state,
            format,
        } => report::report(&state.state_dir, &run, b.as_deref(), annotator.as_deref(), format),
        Command::Serve { state, bind, no_blind } => serve::serve(&state.state_dir, bind, !no_blind),
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.downcast_ref::<std::io::Error>()
        .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
