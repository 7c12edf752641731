//! Run configurations (a)-(d).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::digest::json_digest;
use crate::gateway::BackendConfig;
use crate::ingest::DatasetManifest;
use crate::task::BenchmarkKind;

use super::prompt::PredictOptions;
use super::PipelineError;

/// The four experiment configurations. (a) and (d) answer directly from
/// raw inputs; (b) and (c) add a perception stage. (c) pairs a perception
/// model with a different reasoning model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigId {
    A,
    B,
    C,
    D,
}

impl ConfigId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConfigId::A => "a",
            ConfigId::B => "b",
            ConfigId::C => "c",
            ConfigId::D => "d",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            ConfigId::A | ConfigId::D => Mode::OneStage,
            ConfigId::B | ConfigId::C => Mode::TwoStage,
        }
    }
}

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConfigId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" => Ok(ConfigId::A),
            "b" => Ok(ConfigId::B),
            "c" => Ok(ConfigId::C),
            "d" => Ok(ConfigId::D),
            other => Err(format!("unknown config id `{other}`, expected a, b, c or d")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    OneStage,
    TwoStage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub run_id: String,
    pub config_id: ConfigId,
    pub mode: Mode,
    pub benchmark: BenchmarkKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perception: Option<BackendConfig>,
    pub reasoning: BackendConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetManifest>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub options: PredictOptions,
}

fn default_workers() -> usize {
    4
}

impl RunConfig {
    pub fn one_stage(run_id: &str, config_id: ConfigId, benchmark: BenchmarkKind, reasoning: BackendConfig) -> RunConfig {
        RunConfig {
            run_id: run_id.to_string(),
            config_id,
            mode: Mode::OneStage,
            benchmark,
            perception: None,
            reasoning,
            dataset: None,
            seed: 0,
            workers: default_workers(),
            options: PredictOptions::default(),
        }
    }

    pub fn two_stage(
        run_id: &str,
        config_id: ConfigId,
        benchmark: BenchmarkKind,
        perception: BackendConfig,
        reasoning: BackendConfig,
    ) -> RunConfig {
        RunConfig {
            mode: Mode::TwoStage,
            perception: Some(perception),
            ..RunConfig::one_stage(run_id, config_id, benchmark, reasoning)
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.run_id.is_empty() || self.run_id.contains(['/', '\\']) || self.run_id.starts_with('.') {
            return bad(format!("run id `{}` must be a plain directory name", self.run_id));
        }
        if self.mode != self.config_id.mode() {
            return bad(format!("config ({}) must run in {:?} mode", self.config_id, self.config_id.mode()));
        }
        match (self.mode, &self.perception) {
            (Mode::OneStage, Some(_)) => return bad("one-stage configs take no perception backend".into()),
            (Mode::TwoStage, None) => return bad("two-stage configs need a perception backend".into()),
            _ => {}
        }
        if self.config_id == ConfigId::C {
            let p = self.perception.as_ref().expect("checked above");
            if same_model(p, &self.reasoning) {
                return bad(format!(
                    "config (c) needs different perception and reasoning models, both are `{}`",
                    p.model_name()
                ));
            }
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if let Some(ds) = &self.dataset {
            if ds.benchmark != self.benchmark {
                return bad(format!("dataset is {} but the run is {}", ds.benchmark, self.benchmark));
            }
        }
        if let Some(p) = &self.perception {
            p.validate()?;
        }
        self.reasoning.validate()?;
        Ok(())
    }

    /// Digest of everything that can change predictions. Worker count, run
    /// id, cache location, retry and rate-limit settings are left out, so
    /// changing them does not invalidate persisted predictions.
    pub fn digest(&self) -> String {
        json_digest(&json!({
            "config_id": self.config_id,
            "mode": self.mode,
            "benchmark": self.benchmark,
            "perception": self.perception.as_ref().map(backend_identity),
            "reasoning": backend_identity(&self.reasoning),
            "seed": self.seed,
            "options": self.options,
        }))
    }
}

fn same_model(a: &BackendConfig, b: &BackendConfig) -> bool {
    a.id == b.id || (a.kind == b.kind && a.endpoint == b.endpoint && a.model_name() == b.model_name())
}

/// The parts of a backend config that determine its answers.
fn backend_identity(b: &BackendConfig) -> serde_json::Value {
    let script_file = b.script_file.as_ref().map(|p| match std::fs::read(p) {
        Ok(bytes) => crate::digest::content_digest(&bytes),
        Err(_) => p.to_string_lossy().into_owned(),
    });
    json!({
        "id": b.id,
        "kind": b.kind,
        "endpoint": b.endpoint,
        "model": b.model_name(),
        "script": b.script.as_ref().map(json_digest),
        "script_file": script_file,
        "oracle": b.oracle,
    })
}
