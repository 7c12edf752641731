//! Attribution records and their consistency rules.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pipeline::ConfigId;
use crate::task::Verdict;

pub const RECORD_SCHEMA: u32 = 1;
pub const AUTO_ORACLE_ANNOTATOR: &str = "auto-oracle";

/// Where a prediction went wrong, or that it did not. Error categories are
/// ordered by the step they belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    Correct,
    PerceptionDemo,
    ReasoningInductive,
    PerceptionTest,
    ReasoningDeductive,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 5] = [
        ErrorCategory::Correct,
        ErrorCategory::PerceptionDemo,
        ErrorCategory::ReasoningInductive,
        ErrorCategory::PerceptionTest,
        ErrorCategory::ReasoningDeductive,
    ];
    pub const ERRORS: [ErrorCategory; 4] = [
        ErrorCategory::PerceptionDemo,
        ErrorCategory::ReasoningInductive,
        ErrorCategory::PerceptionTest,
        ErrorCategory::ReasoningDeductive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Correct => "correct",
            ErrorCategory::PerceptionDemo => "perception_demo",
            ErrorCategory::ReasoningInductive => "reasoning_inductive",
            ErrorCategory::PerceptionTest => "perception_test",
            ErrorCategory::ReasoningDeductive => "reasoning_deductive",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ErrorCategory::Correct => "Correct",
            ErrorCategory::PerceptionDemo => "Perception (Demo)",
            ErrorCategory::ReasoningInductive => "Reasoning (Inductive)",
            ErrorCategory::PerceptionTest => "Perception (Test)",
            ErrorCategory::ReasoningDeductive => "Reasoning (Deductive)",
        }
    }

    /// Zero-based step index of an error category; `None` for Correct.
    pub fn step(self) -> Option<usize> {
        match self {
            ErrorCategory::Correct => None,
            ErrorCategory::PerceptionDemo => Some(0),
            ErrorCategory::ReasoningInductive => Some(1),
            ErrorCategory::PerceptionTest => Some(2),
            ErrorCategory::ReasoningDeductive => Some(3),
        }
    }

    pub fn index(self) -> usize {
        self.step().map_or(0, |s| s + 1)
    }

    pub fn from_step(step: usize) -> ErrorCategory {
        ErrorCategory::ERRORS[step]
    }

    pub fn is_perception(self) -> bool {
        matches!(self, ErrorCategory::PerceptionDemo | ErrorCategory::PerceptionTest)
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepVerdict {
    Ok,
    Failed,
    Unreached,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionRecord {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub run_id: String,
    pub task_id: String,
    pub config_id: ConfigId,
    pub category: ErrorCategory,
    /// `human:<name>` or `auto-oracle`.
    pub annotator: String,
    #[serde(default)]
    pub note: String,
    pub steps: [StepVerdict; 4],
    /// Set by the store: 1 for the first submission, then incremented.
    #[serde(default = "default_version")]
    pub version: u32,
}

fn default_schema() -> u32 {
    RECORD_SCHEMA
}

fn default_version() -> u32 {
    1
}

/// Step pattern implied by a category: Correct is all ok; an error at step
/// k has ok before it and unreached after it.
pub fn steps_for(category: ErrorCategory) -> [StepVerdict; 4] {
    let mut steps = [StepVerdict::Ok; 4];
    if let Some(k) = category.step() {
        steps[k] = StepVerdict::Failed;
        for s in steps.iter_mut().skip(k + 1) {
            *s = StepVerdict::Unreached;
        }
    }
    steps
}

/// The category the step verdicts imply, if they form a valid pattern.
pub fn derive_category(steps: &[StepVerdict; 4]) -> Option<ErrorCategory> {
    let category = match steps.iter().position(|s| *s == StepVerdict::Failed) {
        Some(k) => ErrorCategory::from_step(k),
        None => ErrorCategory::Correct,
    };
    (steps_for(category) == *steps).then_some(category)
}

/// One broken rule. `rule` is a stable identifier clients can match on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub message: String,
}

impl Violation {
    fn new(rule: &str, message: String) -> Violation {
        Violation {
            rule: rule.to_string(),
            message,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

pub fn valid_annotator(annotator: &str) -> bool {
    annotator == AUTO_ORACLE_ANNOTATOR || annotator.strip_prefix("human:").is_some_and(|n| !n.trim().is_empty())
}

/// Every rule the record breaks against the task's verdict. Empty means valid.
pub fn validate_record(record: &AttributionRecord, verdict: &Verdict) -> Vec<Violation> {
    let mut out = Vec::new();
    if record.schema != RECORD_SCHEMA {
        out.push(Violation::new("schema", format!("unsupported schema version {}", record.schema)));
    }
    if !valid_annotator(&record.annotator) {
        out.push(Violation::new(
            "annotator",
            format!("annotator `{}` must be `human:<name>` or `auto-oracle`", record.annotator),
        ));
    }
    if record.task_id.is_empty() || record.run_id.is_empty() {
        out.push(Violation::new("identity", "run_id and task_id must be set".to_string()));
    }
    let is_correct = record.category == ErrorCategory::Correct;
    if verdict.correct && !is_correct {
        out.push(Violation::new(
            "Correct required",
            format!("task was scored correct but labeled {}", record.category),
        ));
    }
    if !verdict.correct && is_correct {
        out.push(Violation::new(
            "Correct forbidden",
            "task was scored incorrect but labeled correct".to_string(),
        ));
    }
    let steps = &record.steps;
    let failed = steps.iter().filter(|s| **s == StepVerdict::Failed).count();
    if failed > 1 {
        out.push(Violation::new("multiple failures", format!("{failed} steps are marked failed")));
    }
    match record.category.step() {
        None => {
            if steps.iter().any(|s| *s != StepVerdict::Ok) {
                out.push(Violation::new("all steps ok", "a correct prediction has every step ok".to_string()));
            }
        }
        Some(k) => {
            if steps[k] != StepVerdict::Failed {
                out.push(Violation::new(
                    "category-step mismatch",
                    format!("category {} needs step {} failed", record.category, k + 1),
                ));
            }
            for (j, s) in steps.iter().enumerate().take(k) {
                match s {
                    StepVerdict::Failed => out.push(Violation::new(
                        "earliest-failure",
                        format!("step {} failed before step {}; the earliest failure decides", j + 1, k + 1),
                    )),
                    StepVerdict::Unreached => out.push(Violation::new(
                        "reached-before",
                        format!("step {} must be ok for step {} to be reached", j + 1, k + 1),
                    )),
                    StepVerdict::Ok => {}
                }
            }
            for (j, s) in steps.iter().enumerate().skip(k + 1) {
                if *s == StepVerdict::Ok {
                    out.push(Violation::new(
                        "unreached-after-failure",
                        format!("step {} comes after the failure at step {} and must be unreached", j + 1, k + 1),
                    ));
                }
            }
        }
    }
    out
}
