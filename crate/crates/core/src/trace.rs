//! Append-only record of every model call made for one prediction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gateway::{ModelRequest, ModelResponse, RequestSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Perception,
    Reasoning,
    OneStage,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Perception => "perception",
            Stage::Reasoning => "reasoning",
            Stage::OneStage => "one_stage",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub stage: Stage,
    pub request_digest: String,
    pub request: RequestSummary,
    pub prompt_text: String,
    pub response_text: String,
    pub backend_id: String,
    pub wall_ms: u64,
    pub attempts: u32,
    pub served_from_cache: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TraceEntry {
    pub fn success(stage: Stage, backend_id: &str, request: &ModelRequest, response: &ModelResponse) -> TraceEntry {
        TraceEntry {
            stage,
            request_digest: request.digest().to_string(),
            request: request.summary(),
            prompt_text: request.prompt_text(),
            response_text: response.text.clone(),
            backend_id: backend_id.to_string(),
            wall_ms: response.latency_ms,
            attempts: response.attempts,
            served_from_cache: response.served_from_cache,
            error: None,
        }
    }

    pub fn failure(stage: Stage, backend_id: &str, request: &ModelRequest, error: &str, attempts: u32, wall_ms: u64) -> TraceEntry {
        TraceEntry {
            stage,
            request_digest: request.digest().to_string(),
            request: request.summary(),
            prompt_text: request.prompt_text(),
            response_text: String::new(),
            backend_id: backend_id.to_string(),
            wall_ms,
            attempts,
            served_from_cache: false,
            error: Some(error.to_string()),
        }
    }

    /// True when the stored digest reproduces from the stored payload.
    pub fn digest_matches(&self) -> bool {
        self.request.digest() == self.request_digest
    }

    pub fn image_count(&self) -> usize {
        self.request.image_digests().len()
    }
}

/// A model call that could not produce a usable answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{stage} stage failed: {message}")]
pub struct StageError {
    pub stage: Stage,
    pub message: String,
}

impl StageError {
    pub fn new(stage: Stage, message: impl Into<String>) -> StageError {
        StageError {
            stage,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace {
    entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn new() -> Trace {
        Trace::default()
    }

    pub fn push(&mut self, entry: TraceEntry) {
        self.entries.push(entry);
    }

    pub fn append(&mut self, other: Trace) {
        self.entries.extend(other.entries);
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn stage(&self, stage: Stage) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter().filter(move |e| e.stage == stage)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
