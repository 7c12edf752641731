//! Declarative run manifests (TOML).
//!
//! ```toml
//! version = 1
//! run_id = "miniarc-b"
//! config = "b"
//! benchmark = "miniarc"
//! tasks = "tasks.jsonl"        # canonical task file, or
//! # dataset = "data/miniarc"   # a benchmark root read with its loader
//!
//! [perception]
//! id = "oracle-echo"
//! kind = "oracle-echo"
//!
//! [reasoning]
//! id = "scripted"
//! kind = "scripted"
//! script_file = "script.json"
//! ```
//!
//! Relative paths are resolved against the manifest's directory. Secrets are
//! never stored here: remote backends name an environment variable in
//! `auth_env` instead.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use perceptbench_core::gateway::BackendConfig;
use perceptbench_core::ingest::{self, DatasetManifest};
use perceptbench_core::pipeline::{ConfigId, PredictOptions, RunConfig};
use perceptbench_core::task::{BenchmarkKind, Task};
use serde::Deserialize;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub run_id: String,
    pub config: ConfigId,
    pub benchmark: BenchmarkKind,
    #[serde(default)]
    pub tasks: Option<PathBuf>,
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub split: Option<String>,
    #[serde(default)]
    pub state_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub perception: Option<BackendConfig>,
    pub reasoning: BackendConfig,
    #[serde(default)]
    pub options: PredictOptions,
}

/// A manifest with every path resolved and its tasks loaded.
pub struct LoadedManifest {
    pub config: RunConfig,
    pub tasks: Vec<Task>,
    pub state_dir: Option<PathBuf>,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn resolve_backend(base: &Path, backend: &mut BackendConfig) {
    if let Some(dir) = &backend.cache_dir {
        backend.cache_dir = Some(resolve(base, dir));
    }
    if let Some(file) = &backend.script_file {
        backend.script_file = Some(resolve(base, file));
    }
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let mut manifest: Manifest =
            toml::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        if manifest.version != MANIFEST_VERSION {
            bail!(
                "{}: manifest version {} is not supported (expected {MANIFEST_VERSION})",
                path.display(),
                manifest.version
            );
        }
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        for p in [&mut manifest.tasks, &mut manifest.dataset, &mut manifest.state_dir].into_iter().flatten() {
            *p = resolve(base, p);
        }
        if let Some(perception) = &mut manifest.perception {
            resolve_backend(base, perception);
        }
        resolve_backend(base, &mut manifest.reasoning);
        Ok(manifest)
    }

    pub fn load_tasks(&self) -> Result<(Vec<Task>, DatasetManifest)> {
        match (&self.tasks, &self.dataset) {
            (Some(file), None) => {
                let tasks = ingest::read_tasks(file).with_context(|| format!("reading tasks {}", file.display()))?;
                let split = self.split.as_deref().unwrap_or("tasks");
                Ok((tasks.clone(), DatasetManifest::new(self.benchmark, file, split, &tasks)))
            }
            (None, Some(root)) => {
                let tasks = ingest::load(self.benchmark, root)?;
                let split = self.split.as_deref().unwrap_or("eval");
                let manifest = DatasetManifest::new(self.benchmark, root, split, &tasks);
                Ok((tasks, manifest))
            }
            (Some(_), Some(_)) => bail!("set either `tasks` or `dataset` in the manifest, not both"),
            (None, None) => bail!("the manifest needs `tasks` (a task file) or `dataset` (a benchmark root)"),
        }
    }

    pub fn run_config(&self, dataset: Option<DatasetManifest>) -> RunConfig {
        let mut config = match &self.perception {
            Some(p) => RunConfig::two_stage(&self.run_id, self.config, self.benchmark, p.clone(), self.reasoning.clone()),
            None => RunConfig::one_stage(&self.run_id, self.config, self.benchmark, self.reasoning.clone()),
        };
        config.mode = self.config.mode();
        config.dataset = dataset;
        config.seed = self.seed;
        if let Some(w) = self.workers {
            config.workers = w;
        }
        config.options = self.options.clone();
        config
    }

    pub fn load(path: &Path) -> Result<LoadedManifest> {
        let manifest = Manifest::read(path)?;
        let (tasks, dataset) = manifest.load_tasks()?;
        let config = manifest.run_config(Some(dataset));
        config.validate()?;
        Ok(LoadedManifest {
            config,
            tasks,
            state_dir: manifest.state_dir.clone(),
        })
    }
}
