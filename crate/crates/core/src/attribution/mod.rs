//! Error attribution: earliest-failure categories, validation, tallies,
//! category transitions between configurations, and sampling.

mod oracle;
mod record;
mod sample;
mod store;
mod tally;
mod transition;

use thiserror::Error;

use crate::trace::Stage;

pub use oracle::{attribute_trace, auto_attribute_oracle};
pub use record::{
    derive_category, steps_for, valid_annotator, validate_record, AttributionRecord, ErrorCategory, StepVerdict,
    Violation, AUTO_ORACLE_ANNOTATOR, RECORD_SCHEMA,
};
pub use sample::sample_tasks;
pub use store::AttributionStore;
pub use tally::{tally, tally_markdown, TallyRow, TallyTable};
pub use transition::{flow, transition, transition_markdown, Flow, FlowEdge, FlowNode, Side, TransitionMatrix};

#[derive(Debug, Error)]
pub enum AttributionError {
    #[error("task {task}: {stage} stage missing from trace ({detail})")]
    MissingStage { task: String, stage: Stage, detail: String },
    #[error("task {0} has no known synthetic rule")]
    NotSynthetic(String),
    #[error("record sets differ: only in a: [{}]; only in b: [{}]", only_a.join(", "), only_b.join(", "))]
    SampleMismatch { only_a: Vec<String>, only_b: Vec<String> },
    #[error("task {0} has more than one record")]
    DuplicateTask(String),
    #[error("cannot sample {requested} tasks from {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("record rejected: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Rejected(Vec<Violation>),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(std::io::Error),
}
