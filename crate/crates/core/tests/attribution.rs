use std::path::Path;

use perceptbench_core::attribution::{
    attribute_trace, flow, sample_tasks, steps_for, tally, transition, validate_record, AttributionError,
    AttributionRecord, AttributionStore, ErrorCategory,
};
use perceptbench_core::gateway::{register_script, Backend, BackendConfig, Corruption, OracleOptions};
use perceptbench_core::ingest::{gen_synthetic, RuleKind, SyntheticRule};
use perceptbench_core::offline::{script_two_stage, ReasonerPolicy};
use perceptbench_core::pipeline::{run_config, ConfigId, PredictOptions, RunConfig, RunStore};
use perceptbench_core::task::{BenchmarkKind, Verdict};
use serde::Deserialize;

#[derive(Deserialize)]
struct Fixture {
    name: String,
    verdict: Verdict,
    record: AttributionRecord,
    valid: bool,
    violations: Vec<String>,
}

fn fixtures() -> Vec<Fixture> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/attribution_records.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixtures_report_exactly_the_expected_rules() {
    let all = fixtures();
    assert_eq!(all.len(), 20);
    assert_eq!(all.iter().filter(|f| f.valid).count(), 8);
    for f in &all {
        let rules: Vec<String> = validate_record(&f.record, &f.verdict).into_iter().map(|v| v.rule).collect();
        assert_eq!(rules, f.violations, "{}", f.name);
        assert_eq!(rules.is_empty(), f.valid, "{}", f.name);
    }
}

fn record(task: &str, run: &str, config: ConfigId, category: ErrorCategory) -> AttributionRecord {
    AttributionRecord {
        schema: 1,
        run_id: run.to_string(),
        task_id: task.to_string(),
        config_id: config,
        category,
        annotator: "human:ana".to_string(),
        note: String::new(),
        steps: steps_for(category),
        version: 1,
    }
}

fn verdict_for(category: ErrorCategory) -> Verdict {
    Verdict {
        correct: category == ErrorCategory::Correct,
        detail: perceptbench_core::task::VerdictDetail::ExactMatch,
    }
}

#[test]
fn store_rejects_invalid_and_audits_replacements() {
    let state = tempfile::tempdir().unwrap();
    let store = AttributionStore::new(state.path());
    for f in fixtures().into_iter().filter(|f| !f.valid) {
        match store.submit(f.record.clone(), &f.verdict) {
            Err(AttributionError::Rejected(v)) => assert!(!v.is_empty(), "{}", f.name),
            other => panic!("{}: expected rejection, got {other:?}", f.name),
        }
    }
    assert!(store.records().unwrap().is_empty());

    let first = store
        .submit(record("t1", "r", ConfigId::B, ErrorCategory::PerceptionDemo), &verdict_for(ErrorCategory::PerceptionDemo))
        .unwrap();
    assert_eq!(first.version, 1);
    let revised = record("t1", "r", ConfigId::B, ErrorCategory::ReasoningInductive);
    let second = store.submit(revised, &verdict_for(ErrorCategory::ReasoningInductive)).unwrap();
    assert_eq!(second.version, 2);
    let current = store.records().unwrap();
    assert_eq!(current, vec![second]);
    let audit = store.audit_log().unwrap();
    assert_eq!(audit, vec![first]);

    // A different annotator on the same task is a separate record.
    let mut other = record("t1", "r", ConfigId::B, ErrorCategory::PerceptionTest);
    other.annotator = "human:kim".into();
    store.submit(other, &verdict_for(ErrorCategory::PerceptionTest)).unwrap();
    assert_eq!(store.records().unwrap().len(), 2);
}

#[test]
fn tally_transition_and_flow_agree() {
    use ErrorCategory::*;
    let a_cats = [PerceptionDemo, PerceptionDemo, PerceptionTest, ReasoningInductive, Correct, PerceptionDemo];
    let b_cats = [Correct, PerceptionDemo, Correct, ReasoningInductive, Correct, ReasoningDeductive];
    let a: Vec<_> = a_cats
        .iter()
        .enumerate()
        .map(|(i, c)| record(&format!("t{i}"), "ra", ConfigId::A, *c))
        .collect();
    let b: Vec<_> = b_cats
        .iter()
        .enumerate()
        .map(|(i, c)| record(&format!("t{i}"), "rb", ConfigId::B, *c))
        .collect();
    let matrix = transition(&a, &b).unwrap();
    assert_eq!(matrix.get(PerceptionDemo, Correct), 1);
    assert_eq!(matrix.get(PerceptionDemo, ReasoningDeductive), 1);
    assert_eq!(matrix.total(), 6);

    let tables = tally(&[a.clone(), b.clone()].concat());
    assert_eq!(tables.len(), 2);
    for c in ErrorCategory::ALL {
        assert_eq!(matrix.row_sums()[c.index()], tables[0].count(c));
        assert_eq!(matrix.col_sums()[c.index()], tables[1].count(c));
    }
    assert_eq!(tables[0].rows[0].percent, "60.0");

    let chart = flow(&matrix);
    assert_eq!(chart.nodes.len(), 10);
    let node = |id: &str| chart.nodes.iter().find(|n| n.id == id).unwrap().count;
    assert_eq!(node("a:perception_demo"), 3);
    assert_eq!(node("b:correct"), 3);
    let out_of_demo: u64 = chart.edges.iter().filter(|e| e.source == "a:perception_demo").map(|e| e.weight).sum();
    assert_eq!(out_of_demo, 3);

    let mut short = b.clone();
    short.pop();
    assert!(matches!(transition(&a, &short), Err(AttributionError::SampleMismatch { .. })));
}

#[test]
fn sampling_is_seeded_and_sorted() {
    let ids: Vec<String> = (0..200).map(|i| format!("task{i:03}")).collect();
    let s1 = sample_tasks(&ids, 50, 7).unwrap();
    assert_eq!(s1, sample_tasks(&ids, 50, 7).unwrap());
    assert_ne!(s1, sample_tasks(&ids, 50, 8).unwrap());
    assert!(s1.windows(2).all(|w| w[0] < w[1]));
    assert!(matches!(
        sample_tasks(&ids, 201, 7),
        Err(AttributionError::SampleTooLarge { requested: 201, available: 200 })
    ));
}

#[test]
fn stored_traces_auto_attribute_into_valid_records() {
    let state = tempfile::tempdir().unwrap();
    let tasks = gen_synthetic(SyntheticRule { kind: RuleKind::Rotate90, seed: 3 }, 3, (3, 3), 30);
    let oracle = OracleOptions {
        corruption: Some(Corruption { rate: 0.3, seed: 9 }),
        ..OracleOptions::default()
    };
    let perception = BackendConfig::oracle_echo("noisy-oracle", oracle);
    let probe = Backend::from_config(perception.clone()).unwrap();
    let script = script_two_stage(&tasks, &probe, "scripted", &PredictOptions::default(), ReasonerPolicy::Induce).unwrap();
    let config = RunConfig::two_stage("noisy", ConfigId::B, BenchmarkKind::MiniArc, perception, register_script(script));
    let result = run_config(&config, &tasks, state.path()).unwrap();
    assert!(result.counts.incorrect + result.counts.parse_failures > 0);

    let store = RunStore::open(state.path(), "noisy").unwrap();
    let traces = store.traces().unwrap();
    for task in &tasks {
        let trace = traces.iter().find(|t| t.task_id == task.id()).unwrap();
        let verdict = result.verdict_of(task.id()).unwrap();
        let rec = attribute_trace(task, &trace.entries, verdict, "noisy", ConfigId::B).unwrap();
        assert!(validate_record(&rec, &verdict).is_empty(), "{}", task.id());
        assert_eq!(rec.category == ErrorCategory::Correct, verdict.correct);
    }
}
