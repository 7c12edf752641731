//! Prompt construction for the one-stage and two-stage predictors, and
//! parsing of their answers.

use serde::{Deserialize, Serialize};

use crate::gateway::{DecodingParams, Message, Part};
use crate::perception::render::DEFAULT_CELL_PX;
use crate::perception::text::{parse_grid, serialize_grid};
use crate::perception::{input_image, output_image};
use crate::task::{
    BenchmarkKind, Description, EnrichedTask, Label, OutputDescription, ParseFailure, ParseFailureKind, Parsed,
    Problem, TaskInput, TaskOutput,
};

pub const DESCRIPTION_OPEN: &str = "<description>";
pub const DESCRIPTION_CLOSE: &str = "</description>";

/// Knobs shared by both predictors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictOptions {
    pub cell_px: u32,
    /// One-stage Mini-ARC prompts also carry each grid as text.
    pub one_stage_serialized_grids: bool,
    /// Fan out the perception calls of a task concurrently.
    pub parallel_perception: bool,
    pub params: DecodingParams,
}

impl Default for PredictOptions {
    fn default() -> Self {
        PredictOptions {
            cell_px: DEFAULT_CELL_PX,
            one_stage_serialized_grids: false,
            parallel_perception: false,
            params: DecodingParams::default(),
        }
    }
}

fn intro(benchmark: BenchmarkKind) -> &'static str {
    match benchmark {
        BenchmarkKind::MiniArc => {
            "You are solving a visual abstract reasoning puzzle. Each example shows an input grid and the output grid produced from it by one hidden rule. Work out the rule from the examples and apply it to the test input."
        }
        BenchmarkKind::Acre => {
            "Each example shows a scene of objects placed on a machine and whether the machine's light turned on. Work out which objects cause the light to turn on, then decide the state of the light for the test scene."
        }
        BenchmarkKind::BongardLogo => {
            "The positive examples all follow one concept that every negative example violates. Work out the concept and decide which set the test drawing belongs to."
        }
    }
}

fn answer_instructions(benchmark: BenchmarkKind) -> &'static str {
    match benchmark {
        BenchmarkKind::MiniArc => {
            "State the rule on a line starting with \"Rule:\". Then give the output grid for the test input on the final line, as a list of rows such as [[0, 1], [2, 3]]."
        }
        BenchmarkKind::Acre => {
            "State your reasoning on a line starting with \"Rule:\". Then answer on the final line with exactly one word: activated, deactivated, or undetermined."
        }
        BenchmarkKind::BongardLogo => {
            "State the concept on a line starting with \"Rule:\". Then answer on the final line with exactly one word: positive or negative."
        }
    }
}

fn description_block(desc: &Description) -> Part {
    Part::Text(format!("{DESCRIPTION_OPEN}\n{}\n{DESCRIPTION_CLOSE}", desc.text))
}

fn label_line(label: Label) -> String {
    format!("Label: {label}")
}

/// Single prompt with all demonstrations and the test input as raw images.
pub fn one_stage_messages(problem: &Problem, opts: &PredictOptions) -> std::io::Result<Vec<Message>> {
    let serialized = opts.one_stage_serialized_grids;
    let mut parts = vec![Part::Text(intro(problem.benchmark).to_string())];
    for (i, demo) in problem.demos.iter().enumerate() {
        parts.push(Part::Text(format!("Example {} input:", i + 1)));
        parts.push(Part::Image(input_image(&demo.input, opts.cell_px)?));
        if let (true, TaskInput::Grid(g)) = (serialized, &demo.input) {
            parts.push(Part::Text(serialize_grid(g)));
        }
        parts.push(Part::Text(format!("Example {} output:", i + 1)));
        match &demo.output {
            TaskOutput::Label(l) => parts.push(Part::Text(label_line(*l))),
            out @ TaskOutput::Grid(g) => {
                parts.push(Part::Image(output_image(out, opts.cell_px).expect("grid output")));
                if serialized {
                    parts.push(Part::Text(serialize_grid(g)));
                }
            }
        }
    }
    parts.push(Part::Text("Test input:".to_string()));
    parts.push(Part::Image(input_image(&problem.test_input, opts.cell_px)?));
    if let (true, TaskInput::Grid(g)) = (serialized, &problem.test_input) {
        parts.push(Part::Text(serialize_grid(g)));
    }
    parts.push(Part::Text(answer_instructions(problem.benchmark).to_string()));
    Ok(vec![Message::user(parts)])
}

/// Reasoning prompt over the enriched task: per demonstration the raw
/// input, its description, the raw output and its description (or the label
/// itself), then the test input with its description.
pub fn reasoning_messages(enriched: &EnrichedTask, opts: &PredictOptions) -> std::io::Result<Vec<Message>> {
    let problem = &enriched.problem;
    let mut parts = vec![Part::Text(format!(
        "{} Every image is followed by a description of it.",
        intro(problem.benchmark)
    ))];
    for (i, (demo, descs)) in problem.demos.iter().zip(&enriched.demo_descriptions).enumerate() {
        parts.push(Part::Text(format!("Example {} input:", i + 1)));
        parts.push(Part::Image(input_image(&demo.input, opts.cell_px)?));
        parts.push(description_block(&descs.input));
        parts.push(Part::Text(format!("Example {} output:", i + 1)));
        match (&demo.output, &descs.output) {
            (TaskOutput::Label(l), _) => parts.push(Part::Text(label_line(*l))),
            (out @ TaskOutput::Grid(_), OutputDescription::Described(d)) => {
                parts.push(Part::Image(output_image(out, opts.cell_px).expect("grid output")));
                parts.push(description_block(d));
            }
            (TaskOutput::Grid(_), OutputDescription::Identity) => {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    "grid output without a description",
                ));
            }
        }
    }
    parts.push(Part::Text("Test input:".to_string()));
    parts.push(Part::Image(input_image(&problem.test_input, opts.cell_px)?));
    parts.push(description_block(&enriched.test_input_desc));
    parts.push(Part::Text(answer_instructions(problem.benchmark).to_string()));
    Ok(vec![Message::user(parts)])
}

/// Words accepted for each label, matched as whole lowercase words.
fn lexicon(benchmark: BenchmarkKind) -> &'static [(&'static str, Label)] {
    match benchmark {
        BenchmarkKind::MiniArc => &[],
        BenchmarkKind::Acre => &[
            ("activated", Label::Activated),
            ("deactivated", Label::Deactivated),
            ("undetermined", Label::Undetermined),
            ("underdetermined", Label::Undetermined),
        ],
        BenchmarkKind::BongardLogo => &[("positive", Label::Positive), ("negative", Label::Negative)],
    }
}

/// First lexicon word on the last non-empty line that has one, scanning
/// upward from the end of the response.
pub fn extract_label(benchmark: BenchmarkKind, text: &str) -> Option<Label> {
    let words = lexicon(benchmark);
    for line in text.lines().rev().filter(|l| !l.trim().is_empty()) {
        let lower = line.to_lowercase();
        let hit = lower
            .split(|c: char| !c.is_alphabetic())
            .find_map(|w| words.iter().find(|(word, _)| *word == w).map(|(_, l)| *l));
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// Parses a model answer according to the benchmark's output variant.
pub fn parse_answer(benchmark: BenchmarkKind, text: &str) -> Parsed {
    match benchmark {
        BenchmarkKind::MiniArc => match parse_grid(text) {
            Ok(g) => Parsed::Output(TaskOutput::Grid(g)),
            Err(f) => Parsed::Failure(f),
        },
        BenchmarkKind::Acre | BenchmarkKind::BongardLogo => match extract_label(benchmark, text) {
            Some(l) => Parsed::Output(TaskOutput::Label(l)),
            None => Parsed::Failure(ParseFailure::new(
                ParseFailureKind::NoLabel,
                format!("expected one of {}", label_list(benchmark)),
            )),
        },
    }
}

fn label_list(benchmark: BenchmarkKind) -> String {
    benchmark.labels().iter().map(|l| l.as_str()).collect::<Vec<_>>().join(", ")
}

/// The text after `Rule:` on the last line that starts with it.
pub fn stated_rule(text: &str) -> Option<&str> {
    text.lines()
        .rev()
        .find_map(|l| l.trim().strip_prefix("Rule:").map(str::trim))
}
