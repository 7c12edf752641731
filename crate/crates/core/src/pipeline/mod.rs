//! Prediction, scoring and run orchestration.

mod compare;
mod config;
mod predict;
mod prompt;
mod result;
mod run;
mod score;
mod store;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::gateway::GatewayError;

pub use compare::{compare_runs, delta_markdown, DeltaReport, RateCell};
pub use config::{ConfigId, Mode, RunConfig};
pub use predict::{
    enrich_options, one_stage_request, output_transform, predict_one_stage, predict_two_stage, reasoning_request,
};
pub use prompt::{
    extract_label, one_stage_messages, parse_answer, reasoning_messages, stated_rule, PredictOptions, DESCRIPTION_CLOSE,
    DESCRIPTION_OPEN,
};
pub use result::{rate_string, Counts, RunResult, TaskOutcome};
pub use run::{run_config, run_with_backends};
pub use score::{score, score_parsed};
pub use store::{list_runs, runs_dir, PredictionRecord, RunStore, StoredConfig, TraceRecord};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid run config: {0}")]
    Config(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("run {run_id} already exists with config digest {stored}, current config digests to {current}")]
    ConfigChanged {
        run_id: String,
        stored: String,
        current: String,
    },
    #[error("run not found: {0}")]
    RunNotFound(String),
    #[error("task sets differ: only in a: [{}]; only in b: [{}]", only_a.join(", "), only_b.join(", "))]
    TaskSetMismatch { only_a: Vec<String>, only_b: Vec<String> },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> PipelineError {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
