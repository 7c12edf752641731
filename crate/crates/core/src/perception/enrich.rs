//! Builds an [`EnrichedTask`] by describing every image in a task, one
//! perception request per image.

use std::time::Instant;

use rayon::prelude::*;

use crate::gateway::{DecodingParams, ImagePart, ModelBackend, ModelRequest};
use crate::perception::prompt::PerceptionPromptSpec;
use crate::perception::render::DEFAULT_CELL_PX;
use crate::perception::{input_image, output_image};
use crate::task::{DemoDescriptions, Description, EnrichedTask, OutputDescription, Problem, TaskOutput};
use crate::trace::{Stage, StageError, Trace, TraceEntry};

/// How demonstration outputs are turned into descriptions.
#[derive(Clone, Copy)]
pub enum OutputTransform<'a> {
    /// Describe output images with this backend.
    Backend(&'a dyn ModelBackend),
    /// Pass outputs through unchanged. Only valid for label outputs.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnrichOptions {
    pub cell_px: u32,
    /// Issue the perception calls of one task concurrently.
    pub parallel: bool,
    pub params: DecodingParams,
}

impl Default for EnrichOptions {
    fn default() -> Self {
        EnrichOptions {
            cell_px: DEFAULT_CELL_PX,
            parallel: false,
            params: DecodingParams::default(),
        }
    }
}

/// One perception request and what came of it.
#[derive(Debug, Clone)]
pub struct PerceptionCall {
    pub entry: TraceEntry,
    pub result: Result<Description, StageError>,
}

/// Describes a single image.
pub fn describe_image(
    image: &ImagePart,
    spec: &PerceptionPromptSpec,
    backend: &dyn ModelBackend,
    params: DecodingParams,
) -> PerceptionCall {
    let request = ModelRequest::new(backend.model_name(), spec.messages(image.clone()), params);
    let started = Instant::now();
    match backend.complete(&request) {
        Ok(response) => PerceptionCall {
            entry: TraceEntry::success(Stage::Perception, backend.id(), &request, &response),
            result: Ok(Description {
                text: response.text,
                source_digest: image.digest().to_string(),
                backend_id: backend.id().to_string(),
                prompt_id: spec.prompt_id.clone(),
            }),
        },
        Err(err) => {
            let attempts = match &err {
                crate::gateway::GatewayError::BackendUnavailable { attempts, .. } => *attempts,
                _ => 1,
            };
            let message = err.to_string();
            PerceptionCall {
                entry: TraceEntry::failure(
                    Stage::Perception,
                    backend.id(),
                    &request,
                    &message,
                    attempts,
                    started.elapsed().as_millis() as u64,
                ),
                result: Err(StageError::new(Stage::Perception, message)),
            }
        }
    }
}

/// Perception trace entries in canonical order, plus the enriched task when
/// every call succeeded.
#[derive(Debug, Clone)]
pub struct Enrichment {
    pub trace: Trace,
    pub result: Result<EnrichedTask, StageError>,
}

enum Job<'a> {
    Input(ImagePart),
    Output(ImagePart, &'a dyn ModelBackend),
}

/// Describes every demonstration input, every demonstration output (through
/// `output`) and the test input. Grid tasks issue 2n+1 calls; label tasks
/// with [`OutputTransform::Identity`] issue n+1.
///
/// The trace lists calls as demo 1 input, demo 1 output, ..., test input,
/// whatever order they completed in.
pub fn enrich_task(
    problem: &Problem,
    spec: &PerceptionPromptSpec,
    input_backend: &dyn ModelBackend,
    output: OutputTransform<'_>,
    opts: EnrichOptions,
) -> Enrichment {
    let fail = |message: String| Enrichment {
        trace: Trace::new(),
        result: Err(StageError::new(Stage::Perception, message)),
    };
    if spec.benchmark != problem.benchmark {
        return fail(format!(
            "prompt {} is for {}, task {} is {}",
            spec.prompt_id, spec.benchmark, problem.id, problem.benchmark
        ));
    }

    let mut jobs: Vec<Job> = Vec::with_capacity(problem.demos.len() * 2 + 1);
    // Output slot per demo: Some(index into jobs) or None for identity.
    let mut output_slots = Vec::with_capacity(problem.demos.len());
    for demo in &problem.demos {
        match input_image(&demo.input, opts.cell_px) {
            Ok(img) => jobs.push(Job::Input(img)),
            Err(e) => return fail(format!("reading demo input image of {}: {e}", problem.id)),
        }
        match (&demo.output, output) {
            (TaskOutput::Label(_), OutputTransform::Identity) => output_slots.push(None),
            (TaskOutput::Grid(_), OutputTransform::Identity) => {
                return fail(format!("identity output transform used on grid outputs of {}", problem.id));
            }
            (out, OutputTransform::Backend(b)) => match output_image(out, opts.cell_px) {
                Some(img) => {
                    output_slots.push(Some(jobs.len()));
                    jobs.push(Job::Output(img, b));
                }
                None => return fail(format!("label outputs of {} have no image to describe", problem.id)),
            },
        }
    }
    match input_image(&problem.test_input, opts.cell_px) {
        Ok(img) => jobs.push(Job::Input(img)),
        Err(e) => return fail(format!("reading test input image of {}: {e}", problem.id)),
    }

    let run = |job: &Job| match job {
        Job::Input(img) => describe_image(img, spec, input_backend, opts.params),
        Job::Output(img, b) => describe_image(img, spec, *b, opts.params),
    };
    let calls: Vec<PerceptionCall> = if opts.parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };

    let mut trace = Trace::new();
    let mut descriptions = Vec::with_capacity(calls.len());
    let mut first_error = None;
    for call in calls {
        trace.push(call.entry);
        match call.result {
            Ok(d) => descriptions.push(Some(d)),
            Err(e) => {
                first_error.get_or_insert(e);
                descriptions.push(None);
            }
        }
    }
    if let Some(err) = first_error {
        return Enrichment {
            trace,
            result: Err(err),
        };
    }
    let mut descriptions: Vec<Description> = descriptions.into_iter().map(|d| d.expect("checked")).collect();
    let test_input_desc = descriptions.pop().expect("test input job");
    let mut idx = 0;
    let mut demo_descriptions = Vec::with_capacity(problem.demos.len());
    for slot in output_slots {
        let input = descriptions[idx].clone();
        idx += 1;
        let output = match slot {
            Some(_) => {
                let d = descriptions[idx].clone();
                idx += 1;
                OutputDescription::Described(d)
            }
            None => OutputDescription::Identity,
        };
        demo_descriptions.push(DemoDescriptions { input, output });
    }
    Enrichment {
        trace,
        result: Ok(EnrichedTask {
            problem: problem.clone(),
            demo_descriptions,
            test_input_desc,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{Backend, BackendConfig, OracleOptions, ScriptTable};
    use crate::grid::Grid;
    use crate::perception::describe::oracle_text;
    use crate::task::{BenchmarkKind, Exemplar, Task, TaskInput};

    fn grid_task(n: usize) -> Task {
        let demos = (0..n)
            .map(|i| Exemplar {
                input: TaskInput::Grid(Grid::from_rows(&[[i as u8 + 1, 0]]).unwrap()),
                output: TaskOutput::Grid(Grid::from_rows(&[[0, i as u8 + 1]]).unwrap()),
            })
            .collect();
        Task::new(
            "t",
            BenchmarkKind::MiniArc,
            demos,
            TaskInput::Grid(Grid::from_rows(&[[9u8, 0]]).unwrap()),
            TaskOutput::Grid(Grid::from_rows(&[[0u8, 9]]).unwrap()),
        )
    }

    fn oracle() -> Backend {
        Backend::from_config(BackendConfig::oracle_echo("oracle-echo", OracleOptions::default())).unwrap()
    }

    #[test]
    fn grid_task_makes_2n_plus_1_calls_in_order() {
        let task = grid_task(3);
        let spec = PerceptionPromptSpec::for_benchmark(BenchmarkKind::MiniArc);
        let b = oracle();
        for parallel in [false, true] {
            let opts = EnrichOptions {
                parallel,
                ..EnrichOptions::default()
            };
            let e = enrich_task(task.problem(), &spec, &b, OutputTransform::Backend(&b), opts);
            assert_eq!(e.trace.entries().len(), 7);
            assert!(e.trace.entries().iter().all(|t| t.image_count() == 1));
            let enriched = e.result.unwrap();
            assert_eq!(enriched.descriptions().len(), 7);
            assert_eq!(enriched.demo_descriptions[1].input.text, oracle_text(task.demos()[1].input.as_grid().unwrap()));
            assert_eq!(enriched.test_input_desc.text, oracle_text(task.test_input().as_grid().unwrap()));
        }
        assert_eq!(task.gold().reads(), 0);
    }

    #[test]
    fn backend_failure_is_reported_with_trace() {
        let task = grid_task(2);
        let spec = PerceptionPromptSpec::for_benchmark(BenchmarkKind::MiniArc);
        let empty = Backend::from_config(BackendConfig::scripted("s", ScriptTable::default())).unwrap();
        let e = enrich_task(task.problem(), &spec, &empty, OutputTransform::Backend(&empty), EnrichOptions::default());
        assert_eq!(e.trace.entries().len(), 5);
        assert!(e.trace.entries().iter().all(|t| t.error.is_some()));
        assert_eq!(e.result.unwrap_err().stage, Stage::Perception);
    }

    #[test]
    fn identity_is_rejected_for_grid_outputs() {
        let task = grid_task(1);
        let spec = PerceptionPromptSpec::for_benchmark(BenchmarkKind::MiniArc);
        let b = oracle();
        let e = enrich_task(task.problem(), &spec, &b, OutputTransform::Identity, EnrichOptions::default());
        assert!(e.result.is_err());
        assert!(e.trace.is_empty());
    }

    #[test]
    fn mismatched_prompt_benchmark_is_rejected() {
        let task = grid_task(1);
        let spec = PerceptionPromptSpec::for_benchmark(BenchmarkKind::Acre);
        let b = oracle();
        assert!(enrich_task(task.problem(), &spec, &b, OutputTransform::Backend(&b), EnrichOptions::default())
            .result
            .is_err());
    }
}
