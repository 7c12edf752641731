mod common;

use std::path::{Path, PathBuf};

use common::grid;
use perceptbench_core::ingest::{self, load, read_tasks, write_tasks, DatasetManifest, ACRE_METADATA_FILE};
use perceptbench_core::perception::render::render_grid;
use perceptbench_core::task::{validate_task, BenchmarkKind, Label, TaskInput, TaskOutput};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn png(dir: &Path, name: &str, color: u8) {
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(dir.join(name), render_grid(&grid(&[&[color, 0], &[0, color]]), 4)).unwrap();
}

#[test]
fn miniarc_fixture_loads_with_exact_grids() {
    let tasks = load(BenchmarkKind::MiniArc, &fixtures().join("miniarc")).unwrap();
    assert_eq!(tasks.len(), 1);
    let task = &tasks[0];
    assert_eq!(task.id(), "mirror_sample");
    assert_eq!(task.demos().len(), 1);
    let demo_input = grid(&[&[0, 0, 0, 0, 0], &[3, 3, 0, 0, 0], &[0, 0, 3, 0, 0], &[0, 0, 0, 1, 1], &[0, 0, 0, 4, 1]]);
    assert_eq!(task.demos()[0].input, TaskInput::Grid(demo_input));
    let demo_output = grid(&[&[3, 0, 0, 0, 0], &[0, 3, 3, 0, 0], &[0, 0, 0, 0, 0], &[0, 0, 0, 0, 0], &[0, 0, 0, 0, 0]]);
    assert_eq!(task.demos()[0].output, TaskOutput::Grid(demo_output));
    let test_input = grid(&[&[0, 0, 3, 0, 0], &[3, 3, 3, 0, 0], &[0, 0, 0, 0, 0], &[0, 0, 0, 4, 1], &[0, 0, 0, 1, 1]]);
    assert_eq!(task.test_input(), &TaskInput::Grid(test_input));
    assert!(validate_task(task).is_empty());
}

#[test]
fn task_files_round_trip_without_reading_gold() {
    let tasks = load(BenchmarkKind::MiniArc, &fixtures().join("miniarc")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tasks.jsonl");
    write_tasks(&path, &tasks).unwrap();
    assert_eq!(tasks[0].gold().reads(), 0);
    let back = read_tasks(&path).unwrap();
    assert_eq!(back, tasks);
    let manifest = DatasetManifest::new(BenchmarkKind::MiniArc, &fixtures(), "eval", &back);
    assert_eq!(manifest.task_count, 1);
    assert_eq!(manifest.loader_version, ingest::LOADER_VERSION);
}

#[test]
fn bongard_explicit_layout_yields_one_task_per_test_image() {
    let root = tempfile::tempdir().unwrap();
    let problem = root.path().join("ff").join("ff_nact4_0001");
    for i in 0..6 {
        png(&problem.join("positive"), &format!("{i}.png"), 1);
        png(&problem.join("negative"), &format!("{i}.png"), 2);
    }
    png(&problem.join("test/positive"), "0.png", 1);
    png(&problem.join("test/negative"), "0.png", 2);

    let tasks = load(BenchmarkKind::BongardLogo, root.path()).unwrap();
    let ids: Vec<&str> = tasks.iter().map(|t| t.id()).collect();
    assert_eq!(ids, vec!["ff_nact4_0001_pos0", "ff_nact4_0001_neg0"]);
    for task in &tasks {
        assert_eq!(task.demos().len(), 12);
        let positives = task
            .demos()
            .iter()
            .filter(|d| d.output == TaskOutput::Label(Label::Positive))
            .count();
        assert_eq!(positives, 6);
    }
    assert_eq!(tasks[0].gold().reveal(), &TaskOutput::Label(Label::Positive));
    assert_eq!(tasks[1].gold().reveal(), &TaskOutput::Label(Label::Negative));
}

#[test]
fn bongard_native_layout_holds_out_last_images() {
    let root = tempfile::tempdir().unwrap();
    let problem = root.path().join("bd_0002");
    for i in 0..7 {
        png(&problem.join("1"), &format!("{i}.png"), 3);
        png(&problem.join("0"), &format!("{i}.png"), 4);
    }
    let tasks = load(BenchmarkKind::BongardLogo, root.path()).unwrap();
    assert_eq!(tasks.len(), 2);
    assert!(tasks.iter().all(|t| t.demos().len() == 12));
}

#[test]
fn acre_episode_yields_four_query_tasks() {
    let root = tempfile::tempdir().unwrap();
    let labels = ["on", "off", "on", "off", "on", "on"];
    let demos: Vec<_> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            png(&root.path().join("e0"), &format!("{i}.png"), (i + 1) as u8);
            serde_json::json!({"image": format!("e0/{i}.png"), "label": l})
        })
        .collect();
    let query_labels = ["on", "off", "undetermined", "on"];
    let queries: Vec<_> = query_labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            png(&root.path().join("e0"), &format!("q{i}.png"), (i + 5) as u8);
            serde_json::json!({"image": format!("e0/q{i}.png"), "label": l})
        })
        .collect();
    let meta = serde_json::json!({"episodes": [{"id": "e0", "demos": demos, "queries": queries}]});
    std::fs::write(root.path().join(ACRE_METADATA_FILE), meta.to_string()).unwrap();

    let tasks = load(BenchmarkKind::Acre, root.path()).unwrap();
    assert_eq!(tasks.len(), 4);
    assert_eq!(tasks[2].id(), "e0_q2");
    assert_eq!(tasks[2].gold().reveal(), &TaskOutput::Label(Label::Undetermined));
    assert!(tasks.iter().all(|t| t.demos().len() == 6 && t.benchmark() == BenchmarkKind::Acre));
}

#[test]
fn wrong_benchmark_root_is_a_clear_error() {
    let root = tempfile::tempdir().unwrap();
    let msg = load(BenchmarkKind::Acre, root.path()).unwrap_err().to_string();
    assert!(msg.contains(ACRE_METADATA_FILE), "{msg}");
    let msg = load(BenchmarkKind::BongardLogo, root.path()).unwrap_err().to_string();
    assert!(msg.contains("no Bongard problem directories"), "{msg}");
}
