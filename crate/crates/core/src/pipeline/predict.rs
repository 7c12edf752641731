//! The one-stage predictor f(T) and two-stage predictor h(T̃).

use std::time::Instant;

use crate::gateway::{GatewayError, ModelBackend, ModelRequest};
use crate::perception::enrich::{enrich_task, EnrichOptions, OutputTransform};
use crate::perception::prompt::PerceptionPromptSpec;
use crate::task::{EnrichedTask, ParseFailure, ParseFailureKind, Parsed, Prediction, Problem, Variant};
use crate::trace::{Stage, Trace, TraceEntry};

use super::prompt::{one_stage_messages, parse_answer, reasoning_messages, PredictOptions};

pub fn one_stage_request(problem: &Problem, model: &str, opts: &PredictOptions) -> std::io::Result<ModelRequest> {
    Ok(ModelRequest::new(model, one_stage_messages(problem, opts)?, opts.params))
}

pub fn reasoning_request(enriched: &EnrichedTask, model: &str, opts: &PredictOptions) -> std::io::Result<ModelRequest> {
    Ok(ModelRequest::new(model, reasoning_messages(enriched, opts)?, opts.params))
}

/// Enrichment options matching `opts`.
pub fn enrich_options(opts: &PredictOptions) -> EnrichOptions {
    EnrichOptions {
        cell_px: opts.cell_px,
        parallel: opts.parallel_perception,
        params: opts.params,
    }
}

/// The output transform a benchmark uses: identity for labels, the
/// perception backend for grids.
pub fn output_transform<'a>(problem: &Problem, perception: &'a dyn ModelBackend) -> OutputTransform<'a> {
    if problem.benchmark.output_variant() == Variant::Label {
        OutputTransform::Identity
    } else {
        OutputTransform::Backend(perception)
    }
}

fn failed(problem: &Problem, config_id: &str, trace: Trace, stage: Stage, message: String) -> Prediction {
    Prediction {
        task_id: problem.id.clone(),
        config_id: config_id.to_string(),
        raw_text: String::new(),
        parsed: Parsed::Failure(ParseFailure::new(ParseFailureKind::Backend, message)),
        trace,
        failed_stage: Some(stage),
    }
}

fn attempts_of(err: &GatewayError) -> u32 {
    match err {
        GatewayError::BackendUnavailable { attempts, .. } => *attempts,
        _ => 1,
    }
}

/// Sends `request` and records the call; `Err` carries the failure message.
fn call(stage: Stage, backend: &dyn ModelBackend, request: &ModelRequest, trace: &mut Trace) -> Result<String, String> {
    let started = Instant::now();
    match backend.complete(request) {
        Ok(response) => {
            trace.push(TraceEntry::success(stage, backend.id(), request, &response));
            Ok(response.text)
        }
        Err(err) => {
            let message = err.to_string();
            trace.push(TraceEntry::failure(
                stage,
                backend.id(),
                request,
                &message,
                attempts_of(&err),
                started.elapsed().as_millis() as u64,
            ));
            Err(message)
        }
    }
}

pub fn predict_one_stage(problem: &Problem, backend: &dyn ModelBackend, opts: &PredictOptions, config_id: &str) -> Prediction {
    let mut trace = Trace::new();
    let request = match one_stage_request(problem, backend.model_name(), opts) {
        Ok(r) => r,
        Err(e) => return failed(problem, config_id, trace, Stage::OneStage, format!("building prompt: {e}")),
    };
    match call(Stage::OneStage, backend, &request, &mut trace) {
        Ok(text) => Prediction {
            task_id: problem.id.clone(),
            config_id: config_id.to_string(),
            parsed: parse_answer(problem.benchmark, &text),
            raw_text: text,
            trace,
            failed_stage: None,
        },
        Err(message) => failed(problem, config_id, trace, Stage::OneStage, message),
    }
}

pub fn predict_two_stage(
    problem: &Problem,
    spec: &PerceptionPromptSpec,
    perception: &dyn ModelBackend,
    reasoning: &dyn ModelBackend,
    opts: &PredictOptions,
    config_id: &str,
) -> Prediction {
    let enrichment = enrich_task(
        problem,
        spec,
        perception,
        output_transform(problem, perception),
        enrich_options(opts),
    );
    let mut trace = enrichment.trace;
    let enriched = match enrichment.result {
        Ok(e) => e,
        Err(err) => return failed(problem, config_id, trace, Stage::Perception, err.message),
    };
    let request = match reasoning_request(&enriched, reasoning.model_name(), opts) {
        Ok(r) => r,
        Err(e) => return failed(problem, config_id, trace, Stage::Reasoning, format!("building prompt: {e}")),
    };
    match call(Stage::Reasoning, reasoning, &request, &mut trace) {
        Ok(text) => Prediction {
            task_id: problem.id.clone(),
            config_id: config_id.to_string(),
            parsed: parse_answer(problem.benchmark, &text),
            raw_text: text,
            trace,
            failed_stage: None,
        },
        Err(message) => failed(problem, config_id, trace, Stage::Reasoning, message),
    }
}
