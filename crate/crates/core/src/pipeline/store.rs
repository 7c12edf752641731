//! On-disk layout of a run under `{state_dir}/runs/{run_id}/`:
//!
//! - `config.json`: the run config and its digest
//! - `tasks.jsonl`: the evaluated tasks, gold included
//! - `predictions.jsonl`, `traces.jsonl`: appended as tasks finish
//! - `result.json`: the final [`RunResult`]
//! - `images/{digest}.png`: every image sent to a model, for trace viewers

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::fsutil::{append_jsonl, read_json, read_jsonl, write_atomic, write_json, write_jsonl};
use crate::gateway::ImagePart;
use crate::task::{Parsed, Task, Verdict};
use crate::trace::{Stage, Trace};

use super::config::{ConfigId, RunConfig};
use super::result::RunResult;
use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub task_id: String,
    pub config_id: ConfigId,
    pub config_digest: String,
    pub raw_text: String,
    pub parsed: Parsed,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<Stage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub task_id: String,
    pub config_id: ConfigId,
    pub config_digest: String,
    pub entries: Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredConfig {
    pub config_digest: String,
    pub config: RunConfig,
}

pub struct RunStore {
    dir: PathBuf,
}

pub fn runs_dir(state_dir: &Path) -> PathBuf {
    state_dir.join("runs")
}

/// Run ids with a `config.json`, sorted.
pub fn list_runs(state_dir: &Path) -> std::io::Result<Vec<String>> {
    let dir = runs_dir(state_dir);
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut ids = Vec::new();
    for entry in std::fs::read_dir(&dir)? {
        let entry = entry?;
        if entry.path().join("config.json").is_file() {
            ids.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    ids.sort();
    Ok(ids)
}

impl RunStore {
    pub fn new(state_dir: &Path, run_id: &str) -> RunStore {
        RunStore {
            dir: runs_dir(state_dir).join(run_id),
        }
    }

    /// Opens an existing run; errors when it has no `config.json`.
    pub fn open(state_dir: &Path, run_id: &str) -> Result<RunStore, PipelineError> {
        let store = RunStore::new(state_dir, run_id);
        if !store.config_path().is_file() {
            return Err(PipelineError::RunNotFound(run_id.to_string()));
        }
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn config_path(&self) -> PathBuf {
        self.dir.join("config.json")
    }

    pub fn predictions_path(&self) -> PathBuf {
        self.dir.join("predictions.jsonl")
    }

    pub fn traces_path(&self) -> PathBuf {
        self.dir.join("traces.jsonl")
    }

    pub fn result_path(&self) -> PathBuf {
        self.dir.join("result.json")
    }

    pub fn tasks_path(&self) -> PathBuf {
        self.dir.join("tasks.jsonl")
    }

    pub fn images_dir(&self) -> PathBuf {
        self.dir.join("images")
    }

    /// Creates the run directory, or checks that an existing one was made
    /// with the same config digest.
    pub fn prepare(&self, config: &RunConfig, tasks: &[Task]) -> Result<(), PipelineError> {
        let digest = config.digest();
        let io = |e| PipelineError::io(&self.dir, e);
        if self.config_path().is_file() {
            let stored: StoredConfig = read_json(&self.config_path()).map_err(io)?;
            if stored.config_digest != digest {
                return Err(PipelineError::ConfigChanged {
                    run_id: config.run_id.clone(),
                    stored: stored.config_digest,
                    current: digest,
                });
            }
        } else {
            std::fs::create_dir_all(&self.dir).map_err(io)?;
            write_json(
                &self.config_path(),
                &StoredConfig {
                    config_digest: digest,
                    config: config.clone(),
                },
            )
            .map_err(io)?;
        }
        write_jsonl(&self.tasks_path(), tasks).map_err(io)?;
        std::fs::create_dir_all(self.images_dir()).map_err(io)?;
        Ok(())
    }

    pub fn config(&self) -> Result<StoredConfig, PipelineError> {
        read_json(&self.config_path()).map_err(|e| PipelineError::io(&self.config_path(), e))
    }

    fn read_optional<T: serde::de::DeserializeOwned>(&self, path: &Path) -> Result<Vec<T>, PipelineError> {
        if !path.is_file() {
            return Ok(Vec::new());
        }
        read_jsonl(path).map_err(|e| PipelineError::io(path, e))
    }

    pub fn predictions(&self) -> Result<Vec<PredictionRecord>, PipelineError> {
        self.read_optional(&self.predictions_path())
    }

    pub fn traces(&self) -> Result<Vec<TraceRecord>, PipelineError> {
        self.read_optional(&self.traces_path())
    }

    pub fn tasks(&self) -> Result<Vec<Task>, PipelineError> {
        self.read_optional(&self.tasks_path())
    }

    pub fn result(&self) -> Result<RunResult, PipelineError> {
        read_json(&self.result_path()).map_err(|e| PipelineError::io(&self.result_path(), e))
    }

    pub fn write_result(&self, result: &RunResult) -> Result<(), PipelineError> {
        write_json(&self.result_path(), result).map_err(|e| PipelineError::io(&self.result_path(), e))
    }

    /// Appends the trace first, so a prediction line always has its trace.
    pub fn append(&self, prediction: &PredictionRecord, trace: &TraceRecord) -> Result<(), PipelineError> {
        append_jsonl(&self.traces_path(), trace).map_err(|e| PipelineError::io(&self.traces_path(), e))?;
        append_jsonl(&self.predictions_path(), prediction).map_err(|e| PipelineError::io(&self.predictions_path(), e))
    }

    pub fn image_path(&self, digest: &str) -> PathBuf {
        self.images_dir().join(format!("{digest}.png"))
    }

    pub fn save_image(&self, image: &ImagePart) -> Result<(), PipelineError> {
        let path = self.image_path(image.digest());
        if path.is_file() {
            return Ok(());
        }
        write_atomic(&path, image.bytes()).map_err(|e| PipelineError::io(&path, e))
    }
}
