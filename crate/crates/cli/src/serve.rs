//! HTTP API behind the annotation UI.
//!
//! | route | |
//! |---|---|
//! | `GET /api/runs` | run summaries |
//! | `GET /api/runs/{id}/tasks` | per-task verdicts and attribution status |
//! | `GET /api/runs/{id}/tally` | error tally of the run's records |
//! | `GET /api/tasks/{id}/trace?run=` | problem, stored trace and images |
//! | `GET /api/flows/{a}/{b}` | transition matrix and flow chart |
//! | `POST /api/attributions` | submit one record |
//!
//! Read routes accept `annotator` as a query parameter or an `x-annotator`
//! header. In blind mode the gold output of a task stays hidden until that
//! annotator has a record for it.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use perceptbench_core::attribution::{
    flow, tally, AttributionError, AttributionRecord, AttributionStore, ErrorCategory, Violation,
};
use perceptbench_core::gateway::ImagePart;
use perceptbench_core::perception::{input_image, output_image};
use perceptbench_core::pipeline::{list_runs, Counts, Mode, PipelineError};
use perceptbench_core::task::{BenchmarkKind, TaskInput, TaskOutput, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::attribute::{transition_between, FlowReport};
use crate::state::{open_run, select_records, RunView};

struct AppState {
    state_dir: PathBuf,
    blind: bool,
    attributions: AttributionStore,
}

type Shared = Arc<AppState>;

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn rejected(violations: &[Violation]) -> ApiError {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({ "error": "record rejected", "violations": violations }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(err: anyhow::Error) -> ApiError {
        if let Some(PipelineError::RunNotFound(_)) = err.downcast_ref::<PipelineError>() {
            return ApiError::new(StatusCode::NOT_FOUND, err.to_string());
        }
        if let Some(AttributionError::SampleMismatch { .. }) = err.downcast_ref::<AttributionError>() {
            return ApiError::new(StatusCode::CONFLICT, err.to_string());
        }
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("{err:#}"))
    }
}

impl From<PipelineError> for ApiError {
    fn from(err: PipelineError) -> ApiError {
        ApiError::from(anyhow::Error::from(err))
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs filesystem work off the async executor.
async fn blocking<T, F>(state: &Shared, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&AppState) -> Result<T, ApiError> + Send + 'static,
{
    let state = Arc::clone(state);
    tokio::task::spawn_blocking(move || f(&state))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

#[derive(Debug, Default, Deserialize)]
struct AnnotatorQuery {
    annotator: Option<String>,
    run: Option<String>,
}

fn annotator_of(query: &AnnotatorQuery, headers: &HeaderMap) -> Option<String> {
    query.annotator.clone().or_else(|| {
        headers
            .get("x-annotator")
            .and_then(|v| v.to_str().ok())
            .map(str::to_string)
    })
}

#[derive(Serialize)]
struct RunSummary {
    run_id: String,
    config_id: String,
    mode: Mode,
    benchmark: BenchmarkKind,
    config_digest: String,
    complete: bool,
    counts: Counts,
    success_rate: String,
}

fn summary(view: &RunView) -> RunSummary {
    RunSummary {
        run_id: view.run_id().to_string(),
        config_id: view.stored.config.config_id.to_string(),
        mode: view.stored.config.mode,
        benchmark: view.stored.config.benchmark,
        config_digest: view.stored.config_digest.clone(),
        complete: view.complete,
        counts: view.result.counts,
        success_rate: view.result.success_rate.clone(),
    }
}

async fn runs(State(state): State<Shared>) -> ApiResult<Vec<RunSummary>> {
    blocking(&state, |s| {
        let ids = list_runs(&s.state_dir).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
        let mut out = Vec::new();
        for id in ids {
            out.push(summary(&open_run(&s.state_dir, &id)?));
        }
        Ok(out)
    })
    .await
    .map(Json)
}

#[derive(Serialize)]
struct TaskRow {
    task_id: String,
    verdict: Verdict,
    failed_stage: Option<perceptbench_core::trace::Stage>,
    in_sample: bool,
    attributed: bool,
    category: Option<ErrorCategory>,
}

async fn run_tasks(
    State(state): State<Shared>,
    UrlPath(run_id): UrlPath<String>,
    Query(query): Query<AnnotatorQuery>,
    headers: HeaderMap,
) -> ApiResult<Vec<TaskRow>> {
    let annotator = annotator_of(&query, &headers);
    blocking(&state, move |s| {
        let view = open_run(&s.state_dir, &run_id)?;
        let sample: Option<BTreeSet<String>> = view.sample()?.map(|ids| ids.into_iter().collect());
        let records = s
            .attributions
            .records_for_run(&run_id)
            .map_err(|e| ApiError::from(anyhow::Error::from(e)))?;
        let rows = view
            .result
            .outcomes
            .iter()
            .map(|o| {
                let mine: Vec<&AttributionRecord> = records
                    .iter()
                    .filter(|r| r.task_id == o.task_id)
                    .filter(|r| annotator.as_deref().is_none_or(|a| r.annotator == a))
                    .collect();
                TaskRow {
                    task_id: o.task_id.clone(),
                    verdict: o.verdict,
                    failed_stage: o.failed_stage,
                    in_sample: sample.as_ref().is_some_and(|ids| ids.contains(&o.task_id)),
                    attributed: !mine.is_empty(),
                    category: match mine.as_slice() {
                        [one] => Some(one.category),
                        _ => None,
                    },
                }
            })
            .collect();
        Ok(rows)
    })
    .await
    .map(Json)
}

async fn run_tally(
    State(state): State<Shared>,
    UrlPath(run_id): UrlPath<String>,
    Query(query): Query<AnnotatorQuery>,
    headers: HeaderMap,
) -> ApiResult<Value> {
    let annotator = annotator_of(&query, &headers);
    blocking(&state, move |s| {
        open_run(&s.state_dir, &run_id)?;
        let records = select_records(&s.attributions, &run_id, annotator.as_deref())
            .map_err(|e| ApiError::new(StatusCode::CONFLICT, e.to_string()))?;
        Ok(serde_json::to_value(tally(&records)).expect("tally serializes"))
    })
    .await
    .map(Json)
}

fn data_url(image: &ImagePart) -> String {
    format!("data:{};base64,{}", image.media_type(), STANDARD.encode(image.bytes()))
}

fn input_json(input: &TaskInput, cell_px: u32) -> Value {
    let image = input_image(input, cell_px).ok().map(|i| data_url(&i));
    match input {
        TaskInput::Grid(g) => json!({ "kind": "grid", "grid": g, "image": image }),
        TaskInput::Image(r) => json!({ "kind": "image", "digest": r.digest, "image": image }),
    }
}

fn output_json(output: &TaskOutput, cell_px: u32) -> Value {
    match output {
        TaskOutput::Grid(g) => json!({
            "kind": "grid",
            "grid": g,
            "image": output_image(output, cell_px).map(|i| data_url(&i)),
        }),
        TaskOutput::Label(l) => json!({ "kind": "label", "label": l }),
    }
}

/// Adds a `data_url` next to every image part of a serialized trace entry.
fn inline_images(entry: &mut Value, images_dir: &Path) {
    let Some(messages) = entry.pointer_mut("/request/messages").and_then(Value::as_array_mut) else {
        return;
    };
    for part in messages.iter_mut().filter_map(|m| m.get_mut("parts")).filter_map(Value::as_array_mut).flatten() {
        let Some(image) = part.get_mut("image").and_then(Value::as_object_mut) else {
            continue;
        };
        let digest = image.get("digest").and_then(Value::as_str).unwrap_or_default();
        let media_type = image.get("media_type").and_then(Value::as_str).unwrap_or("image/png");
        let url = std::fs::read(images_dir.join(format!("{digest}.png")))
            .ok()
            .map(|bytes| format!("data:{media_type};base64,{}", STANDARD.encode(bytes)));
        image.insert("data_url".into(), json!(url));
    }
}

async fn task_trace(
    State(state): State<Shared>,
    UrlPath(task_id): UrlPath<String>,
    Query(query): Query<AnnotatorQuery>,
    headers: HeaderMap,
) -> ApiResult<Value> {
    let annotator = annotator_of(&query, &headers);
    let Some(run_id) = query.run.clone() else {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "the `run` query parameter is required"));
    };
    blocking(&state, move |s| {
        let view = open_run(&s.state_dir, &run_id)?;
        let tasks = view.store.tasks()?;
        let not_found = || ApiError::new(StatusCode::NOT_FOUND, format!("task {task_id} not found in run {run_id}"));
        let task = tasks.iter().find(|t| t.id() == task_id).ok_or_else(not_found)?;
        let outcome = view.result.outcomes.iter().find(|o| o.task_id == task_id);
        let traces = view.traces()?;
        let images_dir = view.store.images_dir();
        let entries: Vec<Value> = traces
            .get(&task_id)
            .map(|t| {
                t.entries
                    .entries()
                    .iter()
                    .map(|e| {
                        let mut v = serde_json::to_value(e).expect("trace entries serialize");
                        inline_images(&mut v, &images_dir);
                        v
                    })
                    .collect()
            })
            .unwrap_or_default();

        let record = match &annotator {
            Some(a) => s
                .attributions
                .records_for_run(&run_id)
                .map_err(|e| ApiError::from(anyhow::Error::from(e)))?
                .into_iter()
                .find(|r| r.task_id == task_id && &r.annotator == a),
            None => None,
        };
        let gold_hidden = s.blind && record.is_none();
        let cell_px = view.stored.config.options.cell_px;
        let demos: Vec<Value> = task
            .demos()
            .iter()
            .map(|d| json!({ "input": input_json(&d.input, cell_px), "output": output_json(&d.output, cell_px) }))
            .collect();
        let gold = (!gold_hidden).then(|| output_json(task.gold().reveal(), cell_px));
        Ok(json!({
            "run_id": run_id,
            "task_id": task_id,
            "config_id": view.stored.config.config_id,
            "mode": view.stored.config.mode,
            "benchmark": task.benchmark(),
            "problem": { "demos": demos, "test_input": input_json(task.test_input(), cell_px) },
            "gold_output": gold,
            "gold_hidden": gold_hidden,
            "verdict": outcome.map(|o| o.verdict),
            "parsed": outcome.map(|o| &o.parsed),
            "failed_stage": outcome.and_then(|o| o.failed_stage),
            "entries": entries,
            "record": record,
        }))
    })
    .await
    .map(Json)
}

async fn flows(
    State(state): State<Shared>,
    UrlPath((a, b)): UrlPath<(String, String)>,
    Query(query): Query<AnnotatorQuery>,
    headers: HeaderMap,
) -> ApiResult<FlowReport> {
    let annotator = annotator_of(&query, &headers);
    blocking(&state, move |s| {
        let matrix = transition_between(&s.state_dir, &a, &b, annotator.as_deref())?;
        Ok(FlowReport {
            flow: flow(&matrix),
            matrix,
        })
    })
    .await
    .map(Json)
}

async fn submit(State(state): State<Shared>, body: Bytes) -> ApiResult<AttributionRecord> {
    let record: AttributionRecord = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed attribution record: {e}")))?;
    blocking(&state, move |s| {
        let view = open_run(&s.state_dir, &record.run_id)?;
        let Some(verdict) = view.result.verdict_of(&record.task_id) else {
            return Err(ApiError::new(
                StatusCode::NOT_FOUND,
                format!("task {} has no prediction in run {}", record.task_id, record.run_id),
            ));
        };
        let stored_config = view.stored.config.config_id;
        if record.config_id != stored_config {
            return Err(ApiError::rejected(&[Violation {
                rule: "config-mismatch".into(),
                message: format!("run {} uses config {stored_config}, record says {}", record.run_id, record.config_id),
            }]));
        }
        match s.attributions.submit(record, &verdict) {
            Ok(stored) => Ok(stored),
            Err(AttributionError::Rejected(v)) => Err(ApiError::rejected(&v)),
            Err(e) => Err(ApiError::from(anyhow::Error::from(e))),
        }
    })
    .await
    .map(Json)
}

pub fn router(state_dir: &Path, blind: bool) -> Router {
    let state = Arc::new(AppState {
        state_dir: state_dir.to_path_buf(),
        blind,
        attributions: AttributionStore::new(state_dir),
    });
    Router::new()
        .route("/api/runs", get(runs))
        .route("/api/runs/{id}/tasks", get(run_tasks))
        .route("/api/runs/{id}/tally", get(run_tally))
        .route("/api/tasks/{id}/trace", get(task_trace))
        .route("/api/flows/{a}/{b}", get(flows))
        .route("/api/attributions", post(submit))
        .with_state(state)
}

pub fn serve(state_dir: &Path, bind: SocketAddr, blind: bool) -> anyhow::Result<()> {
    std::fs::create_dir_all(state_dir).with_context(|| format!("creating {}", state_dir.display()))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .with_context(|| format!("binding {bind}"))?;
        let addr = listener.local_addr()?;
        let mut stdout = std::io::stdout().lock();
        writeln!(stdout, "listening on http://{addr}")?;
        stdout.flush()?;
        drop(stdout);
        log::info!("serving {} (blind: {blind})", state_dir.display());
        axum::serve(listener, router(state_dir, blind)).await?;
        Ok(())
    })
}
