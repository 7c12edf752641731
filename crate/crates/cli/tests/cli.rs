mod common;

use common::{json, ok, run, Workspace};

#[test]
fn rerunning_a_manifest_leaves_the_result_byte_identical() {
    let ws = Workspace::new();
    let first = ws.run("rb", "induce");
    assert_eq!(first["counts"]["total"], 10);
    assert_eq!(first["success_rate"], "100.00");
    let result = ws.state().join("runs/rb/result.json");
    let before = std::fs::read(&result).unwrap();

    let again = json(&ok(ws.path(), &["run", "--manifest", "rb.toml"]));
    assert_eq!(again, first);
    assert_eq!(std::fs::read(&result).unwrap(), before);
    let predictions = std::fs::read_to_string(ws.state().join("runs/rb/predictions.jsonl")).unwrap();
    assert_eq!(predictions.lines().count(), 10);
}

#[test]
fn editing_a_manifest_under_an_existing_run_fails() {
    let ws = Workspace::new();
    ws.run("ra", "fixed:identity");
    let manifest = std::fs::read_to_string(ws.path().join("ra.toml")).unwrap();
    let edited = manifest.replace("[reasoning]", "[reasoning]\nmodel = \"other\"");
    std::fs::write(ws.path().join("ra.toml"), edited).unwrap();
    let out = run(ws.path(), &["run", "--manifest", "ra.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config digest"));
}

#[test]
fn compare_reports_the_difference_and_missing_runs() {
    let ws = Workspace::new();
    ws.run("ra", "fixed:identity");
    ws.run("rb", "induce");
    let state = ws.state_arg();
    let report = json(&ok(ws.path(), &["compare", "--a", "ra", "--b", "rb", "--state-dir", &state]));
    assert_eq!(report["a"]["rate"], "0.00");
    assert_eq!(report["b"]["rate"], "100.00");
    assert_eq!(report["delta"], "+100.00");

    let md = ok(ws.path(), &["compare", "--a", "ra", "--b", "rb", "--state-dir", &state, "--format", "md"]);
    assert!(md.contains("+100.00"), "{md}");

    let missing = run(ws.path(), &["compare", "--a", "ra", "--b", "nope", "--state-dir", &state]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("run not found: nope"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["compare", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["synth", "--rule", "spin", "--out", "x"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["synth-script", "--manifest", "m.toml", "--policy", "weak:3:1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn bad_manifests_are_reported() {
    let ws = Workspace::new();
    std::fs::write(ws.path().join("bad.toml"), "version = 1\nrun_id = \"x\"\n").unwrap();
    let out = run(ws.path(), &["run", "--manifest", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: parsing manifest"));

    let two_stage_as_c = std::fs::read_to_string(ws.path().join("rb.toml"))
        .unwrap()
        .replace("config = \"b\"", "config = \"c\"")
        .replace("id = \"oracle-echo\"", "id = \"scripted-rb\"");
    std::fs::write(ws.path().join("c.toml"), two_stage_as_c).unwrap();
    let out = run(ws.path(), &["run", "--manifest", "c.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different perception and reasoning models"));
}

#[test]
fn report_json_is_byte_stable_and_matches_markdown() {
    let ws = Workspace::new();
    ws.run_all();
    let state = ws.state_arg();
    ok(ws.path(), &["attribute", "auto", "--run", "rb", "--all", "--state-dir", &state]);
    ok(ws.path(), &["attribute", "auto", "--run", "rn", "--all", "--state-dir", &state]);

    let args = ["report", "--run", "rb", "--b", "rn", "--state-dir", &state];
    let first = ok(ws.path(), &args);
    let second = ok(ws.path(), &args);
    assert_eq!(first, second);
    let report = json(&first);
    let keys: Vec<&String> = report.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["delta", "flow", "runs", "tallies", "transition"]);
    assert_eq!(report["tallies"].as_array().unwrap().len(), 2);

    let rn_correct = report["runs"][1]["counts"]["correct"].as_u64().unwrap();
    assert_eq!(report["tallies"][1]["correct"].as_u64().unwrap(), rn_correct);

    let md = ok(ws.path(), &[&args[..], &["--format", "md"]].concat());
    assert!(md.contains(report["delta"]["delta"].as_str().unwrap()), "{md}");
    assert!(md.contains("## Transitions"), "{md}");
}

#[test]
fn sampling_auto_attribution_tally_and_flow() {
    let ws = Workspace::new();
    ws.run_all();
    let state = ws.state_arg();

    let sample = json(&ok(ws.path(), &["attribute", "sample", "--run", "rn", "--n", "4", "--seed", "5", "--state-dir", &state]));
    assert_eq!(sample["tasks"].as_array().unwrap().len(), 4);
    let auto = json(&ok(ws.path(), &["attribute", "auto", "--run", "rn", "--state-dir", &state]));
    assert_eq!(auto["attributed"], 4);

    let tally = json(&ok(ws.path(), &["attribute", "tally", "--run", "rn", "--state-dir", &state]));
    assert_eq!(tally[0]["records"], 4);

    // One-stage traces carry no perception calls to judge.
    let out = run(ws.path(), &["attribute", "auto", "--run", "ra", "--all", "--state-dir", &state]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("perception stage missing"));

    // The flow needs the same tasks on both sides.
    let mismatch = run(ws.path(), &["attribute", "flow", "--a", "rb", "--b", "rn", "--state-dir", &state]);
    assert_eq!(mismatch.status.code(), Some(1));
    ok(ws.path(), &["attribute", "auto", "--run", "rb", "--all", "--state-dir", &state]);
    ok(ws.path(), &["attribute", "auto", "--run", "rn", "--all", "--state-dir", &state]);
    let flow = json(&ok(ws.path(), &["attribute", "flow", "--a", "rb", "--b", "rn", "--state-dir", &state]));
    let total: u64 = flow["flow"]["edges"].as_array().unwrap().iter().map(|e| e["weight"].as_u64().unwrap()).sum();
    assert_eq!(total, 10);
}

#[test]
fn ingest_writes_a_canonical_task_file() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("miniarc");
    std::fs::create_dir(&root).unwrap();
    std::fs::copy(
        concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/miniarc/mirror_sample.json"),
        root.join("mirror_sample.json"),
    )
    .unwrap();
    let manifest = json(&ok(
        dir.path(),
        &["ingest", "--benchmark", "miniarc", "--root", "miniarc", "--out", "tasks.jsonl"],
    ));
    assert_eq!(manifest["task_count"], 1);
    let text = std::fs::read_to_string(dir.path().join("tasks.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.contains("\"gold_output\""));
}
