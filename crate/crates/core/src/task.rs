//! Benchmark-agnostic data model: tasks, descriptions, predictions, verdicts.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::digest::content_digest;
use crate::grid::{Grid, MINI_ARC_MAX_DIM};
use crate::trace::{Stage, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BenchmarkKind {
    #[serde(rename = "miniarc")]
    MiniArc,
    #[serde(rename = "acre")]
    Acre,
    #[serde(rename = "bongard")]
    BongardLogo,
}

/// Whether a benchmark's inputs/outputs are grids, images or labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Grid,
    Image,
    Label,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Grid => "grid",
            Variant::Image => "image",
            Variant::Label => "label",
        })
    }
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 3] = [BenchmarkKind::MiniArc, BenchmarkKind::Acre, BenchmarkKind::BongardLogo];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkKind::MiniArc => "miniarc",
            BenchmarkKind::Acre => "acre",
            BenchmarkKind::BongardLogo => "bongard",
        }
    }

    pub fn input_variant(self) -> Variant {
        match self {
            BenchmarkKind::MiniArc => Variant::Grid,
            BenchmarkKind::Acre | BenchmarkKind::BongardLogo => Variant::Image,
        }
    }

    pub fn output_variant(self) -> Variant {
        match self {
            BenchmarkKind::MiniArc => Variant::Grid,
            BenchmarkKind::Acre | BenchmarkKind::BongardLogo => Variant::Label,
        }
    }

    /// The closed label set; empty for grid-output benchmarks.
    pub fn labels(self) -> &'static [Label] {
        match self {
            BenchmarkKind::MiniArc => &[],
            BenchmarkKind::Acre => &[Label::Activated, Label::Deactivated, Label::Undetermined],
            BenchmarkKind::BongardLogo => &[Label::Positive, Label::Negative],
        }
    }

    /// Upper bound on demonstrations. Bongard problems carry up to seven
    /// exemplars per side, so they exceed the usual ten.
    pub fn max_demos(self) -> usize {
        match self {
            BenchmarkKind::MiniArc | BenchmarkKind::Acre => 10,
            BenchmarkKind::BongardLogo => 14,
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchmarkKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "miniarc" | "mini-arc" => Ok(BenchmarkKind::MiniArc),
            "acre" => Ok(BenchmarkKind::Acre),
            "bongard" | "bongard-logo" => Ok(BenchmarkKind::BongardLogo),
            other => Err(format!("unknown benchmark `{other}`")),
        }
    }
}

/// Outcome labels of the label-output benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Activated,
    Deactivated,
    Undetermined,
    Positive,
    Negative,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Activated => "activated",
            Label::Deactivated => "deactivated",
            Label::Undetermined => "undetermined",
            Label::Positive => "positive",
            Label::Negative => "negative",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An image file that belongs to a task, pinned by content digest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageRef {
    pub path: String,
    pub digest: String,
    pub media_type: String,
}

impl ImageRef {
    /// Reads the file and records its digest.
    pub fn from_file(path: &Path) -> std::io::Result<ImageRef> {
        let bytes = std::fs::read(path)?;
        Ok(ImageRef {
            path: path.to_string_lossy().into_owned(),
            digest: content_digest(&bytes),
            media_type: media_type_for(path).to_string(),
        })
    }

    /// Reads the file back, failing if its content no longer matches the digest.
    pub fn read_bytes(&self) -> std::io::Result<Vec<u8>> {
        let bytes = std::fs::read(&self.path)?;
        let found = content_digest(&bytes);
        if found != self.digest {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("{} changed on disk: digest {found}, expected {}", self.path, self.digest),
            ));
        }
        Ok(bytes)
    }
}

pub(crate) fn media_type_for(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("jpg") | Some("jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        _ => "image/png",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskInput {
    Grid(Grid),
    Image(ImageRef),
}

impl TaskInput {
    pub fn variant(&self) -> Variant {
        match self {
            TaskInput::Grid(_) => Variant::Grid,
            TaskInput::Image(_) => Variant::Image,
        }
    }

    pub fn as_grid(&self) -> Option<&Grid> {
        match self {
            TaskInput::Grid(g) => Some(g),
            TaskInput::Image(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskOutput {
    Grid(Grid),
    Label(Label),
}

impl TaskOutput {
    pub fn variant(&self) -> Variant {
        match self {
            TaskOutput::Grid(_) => Variant::Grid,
            TaskOutput::Label(_) => Variant::Label,
        }
    }

    pub fn as_grid(&self) -> Option<&Grid> {
        match self {
            TaskOutput::Grid(g) => Some(g),
            TaskOutput::Label(_) => None,
        }
    }
}

/// One demonstration pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub input: TaskInput,
    pub output: TaskOutput,
}

/// Everything about a task that a model may see.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub id: String,
    pub benchmark: BenchmarkKind,
    pub demos: Vec<Exemplar>,
    pub test_input: TaskInput,
}

/// The held-out answer. Reading it goes through [`Gold::reveal`], which
/// counts reads so prompt paths can be checked never to touch it.
#[derive(Debug, Clone)]
pub struct Gold {
    value: TaskOutput,
    reads: Arc<AtomicU64>,
}

impl Gold {
    fn new(value: TaskOutput) -> Gold {
        Gold {
            value,
            reads: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn reveal(&self) -> &TaskOutput {
        self.reads.fetch_add(1, Ordering::SeqCst);
        &self.value
    }

    /// Number of `reveal` calls on this task (shared across clones).
    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::SeqCst)
    }

    fn peek(&self) -> &TaskOutput {
        &self.value
    }
}

impl PartialEq for Gold {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for Gold {}

/// A task: demonstrations, test input and held-out gold output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TaskRecord", from = "TaskRecord")]
pub struct Task {
    problem: Problem,
    gold: Gold,
}

/// Canonical on-disk form, one JSON object per task.
#[derive(Serialize, Deserialize)]
struct TaskRecord {
    id: String,
    benchmark: BenchmarkKind,
    demos: Vec<Exemplar>,
    test_input: TaskInput,
    gold_output: TaskOutput,
}

impl From<Task> for TaskRecord {
    fn from(task: Task) -> Self {
        let gold_output = task.gold.peek().clone();
        let Problem {
            id,
            benchmark,
            demos,
            test_input,
        } = task.problem;
        TaskRecord {
            id,
            benchmark,
            demos,
            test_input,
            gold_output,
        }
    }
}

impl From<TaskRecord> for Task {
    fn from(r: TaskRecord) -> Self {
        Task::new(r.id, r.benchmark, r.demos, r.test_input, r.gold_output)
    }
}

impl Task {
    pub fn new(
        id: impl Into<String>,
        benchmark: BenchmarkKind,
        demos: Vec<Exemplar>,
        test_input: TaskInput,
        gold_output: TaskOutput,
    ) -> Task {
        Task {
            problem: Problem {
                id: id.into(),
                benchmark,
                demos,
                test_input,
            },
            gold: Gold::new(gold_output),
        }
    }

    pub fn id(&self) -> &str {
        &self.problem.id
    }

    pub fn benchmark(&self) -> BenchmarkKind {
        self.problem.benchmark
    }

    pub fn demos(&self) -> &[Exemplar] {
        &self.problem.demos
    }

    pub fn test_input(&self) -> &TaskInput {
        &self.problem.test_input
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn gold(&self) -> &Gold {
        &self.gold
    }

    /// Same task with demonstrations reordered by `order` (a permutation).
    pub fn with_demo_order(&self, order: &[usize]) -> Task {
        let demos = order.iter().map(|&i| self.problem.demos[i].clone()).collect();
        Task {
            problem: Problem {
                demos,
                ..self.problem.clone()
            },
            gold: self.gold.clone(),
        }
    }
}

/// One broken task invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskViolation {
    EmptyId,
    NoDemos,
    TooManyDemos { found: usize, max: usize },
    VariantMismatch { location: String, expected: Variant, found: Variant },
    LabelOutsideSet { location: String, label: Label },
    GridTooLarge { location: String, rows: usize, cols: usize, max: usize },
}

impl fmt::Display for TaskViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskViolation::EmptyId => write!(f, "task id is empty"),
            TaskViolation::NoDemos => write!(f, "n ≥ 1: task has no demonstrations"),
            TaskViolation::TooManyDemos { found, max } => {
                write!(f, "n ≤ {max}: task has {found} demonstrations")
            }
            TaskViolation::VariantMismatch {
                location,
                expected,
                found,
            } => write!(f, "variant mismatch at {location}: expected {expected}, found {found}"),
            TaskViolation::LabelOutsideSet { location, label } => {
                write!(f, "label `{label}` at {location} is not in the benchmark's label set")
            }
            TaskViolation::GridTooLarge {
                location,
                rows,
                cols,
                max,
            } => write!(f, "grid at {location} is {rows}x{cols}, larger than {max}x{max}"),
        }
    }
}

/// Returns every violated task invariant; an empty list means the task is valid.
pub fn validate_task(task: &Task) -> Vec<TaskViolation> {
    let problem = task.problem();
    let bench = problem.benchmark;
    let mut out = Vec::new();
    if problem.id.is_empty() {
        out.push(TaskViolation::EmptyId);
    }
    let n = problem.demos.len();
    if n == 0 {
        out.push(TaskViolation::NoDemos);
    } else if n > bench.max_demos() {
        out.push(TaskViolation::TooManyDemos {
            found: n,
            max: bench.max_demos(),
        });
    }
    for (i, demo) in problem.demos.iter().enumerate() {
        check_input(bench, &demo.input, &format!("demos[{i}].input"), &mut out);
        check_output(bench, &demo.output, &format!("demos[{i}].output"), &mut out);
    }
    check_input(bench, &problem.test_input, "test_input", &mut out);
    check_output(bench, task.gold.peek(), "gold_output", &mut out);
    out
}

fn check_input(bench: BenchmarkKind, input: &TaskInput, location: &str, out: &mut Vec<TaskViolation>) {
    if input.variant() != bench.input_variant() {
        out.push(TaskViolation::VariantMismatch {
            location: location.to_string(),
            expected: bench.input_variant(),
            found: input.variant(),
        });
    }
    if let TaskInput::Grid(g) = input {
        check_grid_size(bench, g, location, out);
    }
}

fn check_output(bench: BenchmarkKind, output: &TaskOutput, location: &str, out: &mut Vec<TaskViolation>) {
    if output.variant() != bench.output_variant() {
        out.push(TaskViolation::VariantMismatch {
            location: location.to_string(),
            expected: bench.output_variant(),
            found: output.variant(),
        });
    }
    match output {
        TaskOutput::Grid(g) => check_grid_size(bench, g, location, out),
        TaskOutput::Label(label) => {
            if bench.output_variant() == Variant::Label && !bench.labels().contains(label) {
                out.push(TaskViolation::LabelOutsideSet {
                    location: location.to_string(),
                    label: *label,
                });
            }
        }
    }
}

fn check_grid_size(bench: BenchmarkKind, grid: &Grid, location: &str, out: &mut Vec<TaskViolation>) {
    if bench == BenchmarkKind::MiniArc && (grid.rows() > MINI_ARC_MAX_DIM || grid.cols() > MINI_ARC_MAX_DIM) {
        out.push(TaskViolation::GridTooLarge {
            location: location.to_string(),
            rows: grid.rows(),
            cols: grid.cols(),
            max: MINI_ARC_MAX_DIM,
        });
    }
}

/// Natural-language description of exactly one image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Description {
    pub text: String,
    /// Digest of the single image this text describes.
    pub source_digest: String,
    pub backend_id: String,
    pub prompt_id: String,
}

/// Description of a demonstration output: a real description for image
/// outputs, identity for labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputDescription {
    Described(Description),
    Identity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoDescriptions {
    pub input: Description,
    pub output: OutputDescription,
}

/// A task augmented with per-image descriptions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrichedTask {
    pub problem: Problem,
    pub demo_descriptions: Vec<DemoDescriptions>,
    pub test_input_desc: Description,
}

impl EnrichedTask {
    /// All descriptions in prompt order: demo inputs and outputs, then the test input.
    pub fn descriptions(&self) -> Vec<&Description> {
        let mut out = Vec::new();
        for d in &self.demo_descriptions {
            out.push(&d.input);
            if let OutputDescription::Described(desc) = &d.output {
                out.push(desc);
            }
        }
        out.push(&self.test_input_desc);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseFailureKind {
    NoListFound,
    RaggedRows,
    OutOfRange,
    TooLarge,
    NoLabel,
    Backend,
}

impl fmt::Display for ParseFailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseFailureKind::NoListFound => "no list found",
            ParseFailureKind::RaggedRows => "ragged rows",
            ParseFailureKind::OutOfRange => "out-of-range value",
            ParseFailureKind::TooLarge => "grid too large",
            ParseFailureKind::NoLabel => "no label found",
            ParseFailureKind::Backend => "backend failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub kind: ParseFailureKind,
    pub detail: String,
}

impl ParseFailure {
    pub fn new(kind: ParseFailureKind, detail: impl Into<String>) -> ParseFailure {
        ParseFailure {
            kind,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.detail.is_empty() {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "{}: {}", self.kind, self.detail)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parsed {
    Output(TaskOutput),
    Failure(ParseFailure),
}

impl Parsed {
    pub fn output(&self) -> Option<&TaskOutput> {
        match self {
            Parsed::Output(o) => Some(o),
            Parsed::Failure(_) => None,
        }
    }
}

/// One prediction attempt with its full trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub task_id: String,
    pub config_id: String,
    pub raw_text: String,
    pub parsed: Parsed,
    pub trace: Trace,
    /// Set when a backend failed before an answer could be produced.
    pub failed_stage: Option<Stage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictDetail {
    ExactMatch,
    LabelMatch,
    ParseFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub correct: bool,
    pub detail: VerdictDetail,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    fn miniarc(n: usize) -> Task {
        let demos = (0..n)
            .map(|i| Exemplar {
                input: TaskInput::Grid(grid(&[&[i as u8 % 10]])),
                output: TaskOutput::Grid(grid(&[&[0]])),
            })
            .collect();
        Task::new("t", BenchmarkKind::MiniArc, demos, TaskInput::Grid(grid(&[&[1]])), TaskOutput::Grid(grid(&[&[1]])))
    }

    #[test]
    fn well_formed_task_is_ok() {
        assert!(validate_task(&miniarc(3)).is_empty());
    }

    #[test]
    fn zero_demos_is_flagged() {
        let v = validate_task(&miniarc(0));
        assert_eq!(v, vec![TaskViolation::NoDemos]);
        assert!(v[0].to_string().contains("n ≥ 1"));
    }

    #[test]
    fn too_many_demos_is_flagged() {
        assert!(matches!(validate_task(&miniarc(11))[..], [TaskViolation::TooManyDemos { found: 11, max: 10 }]));
    }

    #[test]
    fn label_output_on_miniarc_is_variant_mismatch() {
        let mut demos = miniarc(3).demos().to_vec();
        demos[1].output = TaskOutput::Label(Label::Positive);
        let task = Task::new("t", BenchmarkKind::MiniArc, demos, TaskInput::Grid(grid(&[&[1]])), TaskOutput::Grid(grid(&[&[1]])));
        let v = validate_task(&task);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("variant mismatch"));
        assert!(v[0].to_string().contains("demos[1].output"));
    }

    #[test]
    fn acre_rejects_bongard_label() {
        let img = ImageRef {
            path: "x.png".into(),
            digest: "d".into(),
            media_type: "image/png".into(),
        };
        let demos = vec![Exemplar {
            input: TaskInput::Image(img.clone()),
            output: TaskOutput::Label(Label::Positive),
        }];
        let task = Task::new("t", BenchmarkKind::Acre, demos, TaskInput::Image(img), TaskOutput::Label(Label::Activated));
        assert!(matches!(validate_task(&task)[..], [TaskViolation::LabelOutsideSet { .. }]));
    }

    #[test]
    fn validate_is_pure() {
        let task = miniarc(0);
        assert_eq!(validate_task(&task), validate_task(&task));
        assert_eq!(task.gold().reads(), 0);
    }

    #[test]
    fn canonical_json_roundtrip() {
        let task = miniarc(2);
        let json = serde_json::to_value(&task).unwrap();
        assert_eq!(json["benchmark"], "miniarc");
        assert_eq!(json["gold_output"]["grid"], serde_json::json!([[1]]));
        assert_eq!(json["demos"][0]["input"]["grid"], serde_json::json!([[0]]));
        let back: Task = serde_json::from_value(json).unwrap();
        assert_eq!(back, task);
        assert_eq!(task.gold().reads(), 0);
    }

    #[test]
    fn reveal_counts_reads_across_clones() {
        let task = miniarc(1);
        let clone = task.clone();
        clone.gold().reveal();
        assert_eq!(task.gold().reads(), 1);
    }
}
