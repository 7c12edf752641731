#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_perceptbench"));
    cmd.env_remove("PERCEPTBENCH_STATE").env("RUST_LOG", "error");
    cmd
}

/// Runs the binary in `dir`, asserting success, and returns stdout.
pub fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "perceptbench {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

pub fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("not JSON ({e}): {text}"))
}

const ONE_STAGE: &str = r#"
version = 1
run_id = "ra"
config = "a"
benchmark = "miniarc"
tasks = "tasks.jsonl"
state_dir = "state"

[reasoning]
id = "scripted-a"
kind = "scripted"
script_file = "scripts/a.json"
"#;

fn two_stage(run_id: &str, corruption: Option<(f64, u64)>) -> String {
    let oracle = match corruption {
        Some((rate, seed)) => format!("\n[perception.oracle.corruption]\nrate = {rate}\nseed = {seed}\n"),
        None => String::new(),
    };
    format!(
        r#"
version = 1
run_id = "{run_id}"
config = "b"
benchmark = "miniarc"
tasks = "tasks.jsonl"
state_dir = "state"

[reasoning]
id = "scripted-{run_id}"
kind = "scripted"
script_file = "scripts/{run_id}.json"

[perception]
id = "oracle-echo"
kind = "oracle-echo"
{oracle}"#
    )
}

/// A workspace with ten synthetic tasks and manifests for three runs:
/// `ra` (one-stage, always answers the identity), `rb` (two-stage, exact
/// perception) and `rn` (two-stage, noisy perception).
pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new() -> Workspace {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace { dir };
        ok(
            ws.path(),
            &["synth", "--rule", "hmirror", "--rule", "rot90", "--count", "5", "--seed", "3", "--out", "tasks.jsonl"],
        );
        std::fs::write(ws.path().join("ra.toml"), ONE_STAGE).unwrap();
        std::fs::write(ws.path().join("rb.toml"), two_stage("rb", None)).unwrap();
        std::fs::write(ws.path().join("rn.toml"), two_stage("rn", Some((0.3, 9)))).unwrap();
        ws
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn state(&self) -> PathBuf {
        self.path().join("state")
    }

    pub fn state_arg(&self) -> String {
        self.state().to_string_lossy().into_owned()
    }

    /// Scripts and runs one manifest, returning the run summary.
    pub fn run(&self, run_id: &str, policy: &str) -> Value {
        let manifest = format!("{run_id}.toml");
        ok(self.path(), &["synth-script", "--manifest", &manifest, "--policy", policy]);
        json(&ok(self.path(), &["run", "--manifest", &manifest]))
    }

    pub fn run_all(&self) {
        self.run("ra", "fixed:identity");
        self.run("rb", "induce");
        self.run("rn", "induce");
    }
}
