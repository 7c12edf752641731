//! Machine attribution for synthetic tasks, where every step can be checked
//! against ground truth: the oracle describer for perception and the
//! generating rule for reasoning.

use crate::ingest::{rule_from_task_id, RuleKind};
use crate::offline::same_rule;
use crate::perception::describe::oracle_text;
use crate::pipeline::{score, stated_rule, ConfigId};
use crate::task::{Prediction, Task, TaskOutput, Verdict};
use crate::trace::{Stage, Trace};

use super::record::{steps_for, AttributionRecord, ErrorCategory, AUTO_ORACLE_ANNOTATOR, RECORD_SCHEMA};
use super::AttributionError;

/// Attributes a two-stage prediction on a synthetic task.
pub fn auto_attribute_oracle(task: &Task, prediction: &Prediction, run_id: &str) -> Result<AttributionRecord, AttributionError> {
    let config_id: ConfigId = prediction
        .config_id
        .parse()
        .map_err(|e: String| AttributionError::Invalid(e))?;
    let verdict = score(prediction, task.gold().reveal());
    attribute_trace(task, &prediction.trace, verdict, run_id, config_id)
}

/// Same as [`auto_attribute_oracle`] for a stored trace and verdict.
pub fn attribute_trace(
    task: &Task,
    trace: &Trace,
    verdict: Verdict,
    run_id: &str,
    config_id: ConfigId,
) -> Result<AttributionRecord, AttributionError> {
    let rule = rule_from_task_id(task.id()).ok_or_else(|| AttributionError::NotSynthetic(task.id().to_string()))?;
    let perception: Vec<_> = trace.stage(Stage::Perception).collect();
    let n = task.demos().len();
    if perception.len() != 2 * n + 1 {
        return Err(AttributionError::MissingStage {
            task: task.id().to_string(),
            stage: Stage::Perception,
            detail: format!("expected {} perception calls, found {}", 2 * n + 1, perception.len()),
        });
    }
    let reasoning = trace.stage(Stage::Reasoning).last().ok_or_else(|| AttributionError::MissingStage {
        task: task.id().to_string(),
        stage: Stage::Reasoning,
        detail: "no reasoning call".to_string(),
    })?;

    let truth = |idx: usize| -> Option<String> {
        let grid = if idx == 2 * n {
            task.test_input().as_grid()
        } else if idx.is_multiple_of(2) {
            task.demos()[idx / 2].input.as_grid()
        } else {
            match &task.demos()[idx / 2].output {
                TaskOutput::Grid(g) => Some(g),
                TaskOutput::Label(_) => None,
            }
        };
        grid.map(oracle_text)
    };
    let described_right = |idx: usize| perception[idx].error.is_none() && truth(idx).as_deref() == Some(perception[idx].response_text.as_str());

    let demos_ok = (0..2 * n).all(described_right);
    let test_ok = described_right(2 * n);
    let rule_ok = reasoning.error.is_none()
        && stated_rule(&reasoning.response_text)
            .and_then(|s| s.parse::<RuleKind>().ok())
            .is_some_and(|stated| same_rule(stated, rule));

    let category = if verdict.correct {
        ErrorCategory::Correct
    } else if !demos_ok {
        ErrorCategory::PerceptionDemo
    } else if !rule_ok {
        ErrorCategory::ReasoningInductive
    } else if !test_ok {
        ErrorCategory::PerceptionTest
    } else {
        ErrorCategory::ReasoningDeductive
    };
    Ok(AttributionRecord {
        schema: RECORD_SCHEMA,
        run_id: run_id.to_string(),
        task_id: task.id().to_string(),
        config_id,
        category,
        annotator: AUTO_ORACLE_ANNOTATOR.to_string(),
        note: format!("auto-attributed against oracle descriptions and rule {rule}"),
        steps: steps_for(category),
        version: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::validate_record;
    use crate::gateway::{Backend, BackendConfig, Corruption, OracleOptions};
    use crate::ingest::{gen_synthetic, SyntheticRule};
    use crate::offline::{script_two_stage, ReasonerPolicy};
    use crate::perception::prompt::PerceptionPromptSpec;
    use crate::pipeline::{predict_two_stage, PredictOptions};
    use crate::task::BenchmarkKind;

    fn predict(task: &Task, corruption: Option<Corruption>, policy: ReasonerPolicy) -> Prediction {
        let opts = PredictOptions::default();
        let perception = Backend::from_config(BackendConfig::oracle_echo(
            "oracle-echo",
            OracleOptions {
                corruption,
                ..OracleOptions::default()
            },
        ))
        .unwrap();
        let table = script_two_stage(std::slice::from_ref(task), &perception, "reasoner", &opts, policy).unwrap();
        let reasoner = Backend::from_config(BackendConfig::scripted("reasoner", table)).unwrap();
        let spec = PerceptionPromptSpec::for_benchmark(BenchmarkKind::MiniArc);
        predict_two_stage(task.problem(), &spec, &perception, &reasoner, &opts, "b")
    }

    fn mirror_task() -> Task {
        gen_synthetic(
            SyntheticRule {
                kind: RuleKind::HorizontalMirror,
                seed: 11,
            },
            3,
            (4, 4),
            1,
        )
        .remove(0)
    }

    #[test]
    fn correct_pipeline_is_correct() {
        let task = mirror_task();
        let p = predict(&task, None, ReasonerPolicy::Induce);
        let rec = auto_attribute_oracle(&task, &p, "r").unwrap();
        assert_eq!(rec.category, ErrorCategory::Correct);
        assert!(validate_record(&rec, &score(&p, task.gold().reveal())).is_empty());
    }

    #[test]
    fn wrong_rule_is_inductive() {
        let task = mirror_task();
        let p = predict(
            &task,
            None,
            ReasonerPolicy::FixedRule {
                rule: RuleKind::Rotate90,
            },
        );
        let rec = auto_attribute_oracle(&task, &p, "r").unwrap();
        assert_eq!(rec.category, ErrorCategory::ReasoningInductive);
    }

    #[test]
    fn corrupted_demos_are_perception_demo() {
        let task = mirror_task();
        let p = predict(&task, Some(Corruption { rate: 1.0, seed: 1 }), ReasonerPolicy::Induce);
        let rec = auto_attribute_oracle(&task, &p, "r").unwrap();
        assert_eq!(rec.category, ErrorCategory::PerceptionDemo);
        // Deterministic and idempotent.
        assert_eq!(rec, auto_attribute_oracle(&task, &p, "r").unwrap());
    }

    #[test]
    fn misapplied_rule_is_deductive() {
        let task = mirror_task();
        let p = predict(&task, None, ReasonerPolicy::Weak { miss_rate: 1.0, seed: 0 });
        let rec = auto_attribute_oracle(&task, &p, "r").unwrap();
        assert_eq!(rec.category, ErrorCategory::ReasoningDeductive);
    }

    #[test]
    fn one_stage_trace_is_missing_perception() {
        let task = mirror_task();
        let p = Prediction {
            task_id: task.id().into(),
            config_id: "a".into(),
            raw_text: String::new(),
            parsed: crate::task::Parsed::Failure(crate::task::ParseFailure::new(
                crate::task::ParseFailureKind::NoListFound,
                "",
            )),
            trace: Trace::new(),
            failed_stage: None,
        };
        assert!(matches!(
            auto_attribute_oracle(&task, &p, "r"),
            Err(AttributionError::MissingStage { .. })
        ));
    }
}
