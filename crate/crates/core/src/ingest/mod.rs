//! Benchmark loaders and the synthetic task generator.

mod acre;
mod bongard;
mod miniarc;
mod synthetic;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::task::{validate_task, BenchmarkKind, Task};

pub use acre::{load_acre, ACRE_METADATA_FILE};
pub use bongard::load_bongard;
pub use miniarc::load_miniarc;
pub use synthetic::{gen_synthetic, rule_from_task_id, RuleKind, SyntheticRule};

pub const LOADER_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed JSON: {message}", path.display())]
    Json { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> IngestError {
        IngestError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn invalid(path: &Path, message: impl Into<String>) -> IngestError {
        IngestError::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

/// Describes what a loader produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub benchmark: BenchmarkKind,
    pub root_path: String,
    pub split: String,
    pub task_count: usize,
    pub loader_version: String,
}

impl DatasetManifest {
    pub fn new(benchmark: BenchmarkKind, root: &Path, split: &str, tasks: &[Task]) -> DatasetManifest {
        DatasetManifest {
            benchmark,
            root_path: root.to_string_lossy().into_owned(),
            split: split.to_string(),
            task_count: tasks.len(),
            loader_version: LOADER_VERSION.to_string(),
        }
    }
}

/// Dispatches to the loader for `benchmark`.
pub fn load(benchmark: BenchmarkKind, root: &Path) -> Result<Vec<Task>, IngestError> {
    match benchmark {
        BenchmarkKind::MiniArc => load_miniarc(root),
        BenchmarkKind::Acre => load_acre(root),
        BenchmarkKind::BongardLogo => load_bongard(root),
    }
}

/// Rejects a loaded task that breaks any task invariant.
pub(crate) fn ensure_valid(task: &Task, path: &Path) -> Result<(), IngestError> {
    let violations = validate_task(task);
    if violations.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
    Err(IngestError::invalid(path, format!("task {}: {}", task.id(), list.join("; "))))
}

pub(crate) fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| IngestError::io(dir, e))? {
        out.push(entry.map_err(|e| IngestError::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

pub(crate) fn is_image_file(path: &Path) -> bool {
    path.is_file()
        && matches!(
            path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
            Some("png" | "jpg" | "jpeg" | "gif" | "webp")
        )
}

/// Writes tasks in the canonical schema, one JSON object per line.
pub fn write_tasks(path: &Path, tasks: &[Task]) -> std::io::Result<()> {
    crate::fsutil::write_jsonl(path, tasks)
}

pub fn read_tasks(path: &Path) -> std::io::Result<Vec<Task>> {
    crate::fsutil::read_jsonl(path)
}
