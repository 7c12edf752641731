use serde::{Deserialize, Serialize};

use crate::decimal;
use crate::task::{BenchmarkKind, Parsed, ParseFailure, ParseFailureKind, TaskOutput, Verdict, VerdictDetail};
use crate::trace::Stage;

use super::config::ConfigId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub task_id: String,
    pub verdict: Verdict,
    pub parsed: Parsed,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<Stage>,
}

/// Integer tallies; `incorrect` includes parse and backend failures.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub total: u64,
    pub correct: u64,
    pub incorrect: u64,
    pub parse_failures: u64,
    pub backend_failures: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_id: String,
    pub config_id: ConfigId,
    pub benchmark: BenchmarkKind,
    pub config_digest: String,
    pub counts: Counts,
    /// `100 * correct / total`, rendered to two decimals.
    pub success_rate: String,
    /// One entry per task, in task order.
    pub outcomes: Vec<TaskOutcome>,
}

impl RunResult {
    pub fn from_outcomes(
        run_id: &str,
        config_id: ConfigId,
        benchmark: BenchmarkKind,
        config_digest: &str,
        outcomes: Vec<TaskOutcome>,
    ) -> RunResult {
        let mut counts = Counts {
            total: outcomes.len() as u64,
            ..Counts::default()
        };
        for o in &outcomes {
            if o.verdict.correct {
                counts.correct += 1;
            } else {
                counts.incorrect += 1;
            }
            if o.verdict.detail == VerdictDetail::ParseFailure {
                counts.parse_failures += 1;
            }
            if o.failed_stage.is_some() {
                counts.backend_failures += 1;
            }
        }
        RunResult {
            run_id: run_id.to_string(),
            config_id,
            benchmark,
            config_digest: config_digest.to_string(),
            success_rate: rate_string(counts.correct, counts.total),
            counts,
            outcomes,
        }
    }

    /// A result built from bare correct/incorrect flags, for reproducing
    /// reported tables from per-task verdicts.
    pub fn from_verdicts(run_id: &str, config_id: ConfigId, benchmark: BenchmarkKind, verdicts: &[(String, bool)]) -> RunResult {
        let outcomes = verdicts
            .iter()
            .map(|(id, correct)| TaskOutcome {
                task_id: id.clone(),
                verdict: Verdict {
                    correct: *correct,
                    detail: if benchmark == BenchmarkKind::MiniArc {
                        VerdictDetail::ExactMatch
                    } else {
                        VerdictDetail::LabelMatch
                    },
                },
                parsed: Parsed::Failure(ParseFailure::new(ParseFailureKind::Backend, "fixture: no prediction text")),
                failed_stage: None,
            })
            .collect();
        RunResult::from_outcomes(run_id, config_id, benchmark, "fixture", outcomes)
    }

    pub fn verdict_of(&self, task_id: &str) -> Option<Verdict> {
        self.outcomes.iter().find(|o| o.task_id == task_id).map(|o| o.verdict)
    }

    pub fn task_ids(&self) -> impl Iterator<Item = &str> {
        self.outcomes.iter().map(|o| o.task_id.as_str())
    }

    pub fn predicted_output(&self, task_id: &str) -> Option<&TaskOutput> {
        self.outcomes.iter().find(|o| o.task_id == task_id).and_then(|o| o.parsed.output())
    }
}

pub fn rate_string(correct: u64, total: u64) -> String {
    if total == 0 {
        return "0.00".to_string();
    }
    decimal::percent(correct as i128, total as i128, 2)
}
