//! HTTP facade over the search: store instances, start runs, poll their
//! progress, inspect alternatives period by period and refine a finished
//! run towards a preferred region of the front.
//!
//! All routes live under `/api/v1`; errors are JSON `{code, message}`.

mod error;
mod store;
mod views;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use irp_core::{io, validate_instance, Budget, FrequencyVector, NormalizedPoint, SearchConfig, SolverKind, Weights};
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub use error::{ApiError, ErrorBody};
pub use store::{RunHandle, RunSnapshot, RunState, Store};
pub use views::{ArchiveRow, CustomerView, RouteView, RunView, SolutionView, StopView};

type ApiResult<T> = Result<T, ApiError>;

pub fn router(store: Arc<Store>) -> Router {
    let api = Router::new()
        .route("/instances", post(create_instance))
        .route("/instances/{id}", get(get_instance))
        .route("/runs", post(create_run).get(list_runs))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/archive", get(get_archive))
        .route("/runs/{id}/solutions/{sid}", get(get_solution))
        .route("/runs/{id}/refine", post(refine_run))
        .route("/runs/{id}/stop", post(stop_run));
    Router::new().nest("/api/v1", api).with_state(store)
}

pub async fn serve(addr: SocketAddr, store: Arc<Store>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store)).await
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

fn find_run(store: &Store, id: &str) -> ApiResult<Arc<RunHandle>> {
    store.run(id).ok_or_else(|| ApiError::not_found("run", id))
}

fn accepted(id: &str, state: RunState) -> Response {
    (StatusCode::ACCEPTED, Json(serde_json::json!({ "id": id, "state": state }))).into_response()
}

async fn create_instance(State(store): State<Arc<Store>>, body: Bytes) -> ApiResult<Response> {
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    let inst = io::parse_instance(text)?;
    let report = validate_instance(&inst)?;
    if !report.is_valid() {
        return Err(irp_core::Error::Invalid(report).into());
    }
    let id = store.add_instance(inst)?;
    Ok((StatusCode::CREATED, Json(serde_json::json!({ "id": id }))).into_response())
}

async fn get_instance(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Response> {
    let inst = store.instance(&id).ok_or_else(|| ApiError::not_found("instance", &id))?;
    Ok(Json(&*inst).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RunRequest {
    instance_id: String,
    ref_points: usize,
    #[serde(default = "default_solver")]
    solver: SolverKind,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    budget: Budget,
    mixed_samples: Option<usize>,
    weights: Option<Weights>,
}

fn default_solver() -> SolverKind {
    SolverKind::Rtr
}

async fn create_run(State(store): State<Arc<Store>>, body: Bytes) -> ApiResult<Response> {
    let req: RunRequest = parse_body(&body)?;
    if store.instance(&req.instance_id).is_none() {
        return Err(ApiError::not_found("instance", &req.instance_id));
    }
    let defaults = SearchConfig::default();
    let config = SearchConfig {
        ref_point_count: req.ref_points,
        solver: req.solver,
        seed: req.seed,
        budget: req.budget,
        mixed_samples: req.mixed_samples.unwrap_or(defaults.mixed_samples),
        weights: req.weights.unwrap_or(defaults.weights),
        ..defaults
    };
    let id = store
        .start_run(&req.instance_id, config)?
        .ok_or_else(|| ApiError::not_found("instance", &req.instance_id))?;
    Ok(accepted(&id, RunState::Constructing))
}

async fn list_runs(State(store): State<Arc<Store>>) -> Json<Vec<serde_json::Value>> {
    let runs = store
        .run_ids()
        .into_iter()
        .filter_map(|id| store.run(&id))
        .map(|h| {
            let snap = h.snapshot();
            serde_json::json!({ "id": h.id, "instanceId": h.instance_id, "state": snap.state })
        })
        .collect();
    Json(runs)
}

async fn get_run(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Json<RunView>> {
    let handle = find_run(&store, &id)?;
    Ok(Json(RunView::new(&handle, &handle.snapshot())))
}

async fn get_archive(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Json<Vec<ArchiveRow>>> {
    let handle = find_run(&store, &id)?;
    Ok(Json(views::archive_rows(&handle.snapshot().archive)))
}

#[derive(Debug, Deserialize)]
struct PeriodQuery {
    period: Option<usize>,
}

async fn get_solution(
    State(store): State<Arc<Store>>,
    Path((id, sid)): Path<(String, String)>,
    Query(query): Query<PeriodQuery>,
) -> ApiResult<Json<SolutionView>> {
    let handle = find_run(&store, &id)?;
    let freqs = FrequencyVector::parse_key(&sid).map_err(|_| ApiError::not_found("solution", &sid))?;
    let snap = handle.snapshot();
    if !snap.archive.iter().any(|e| e.payload == freqs) {
        return Err(ApiError::not_found("solution", &sid));
    }
    let horizon = handle.instance.horizon;
    let period = query.period.unwrap_or(1);
    if !(1..=horizon).contains(&period) {
        return Err(ApiError::unprocessable(format!("period {period} outside 1..={horizon}")));
    }
    let instance = handle.instance.clone();
    let settings = snap.config.eval_settings();
    let view = tokio::task::spawn_blocking(move || {
        let solution = irp_core::evaluate(&instance, &freqs, &settings)?;
        SolutionView::new(&instance, &solution, period)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(view))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RefineRequest {
    points: Vec<NormalizedPoint>,
}

async fn refine_run(State(store): State<Arc<Store>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let handle = find_run(&store, &id)?;
    let req: RefineRequest = parse_body(&body)?;
    if let Some(p) = req.points.iter().find(|p| !p.in_unit_square()) {
        return Err(ApiError::unprocessable(format!("reference point ({}, {}) outside [0, 1]²", p.u, p.v)));
    }
    let state = store
        .refine(&handle, &req.points)?
        .ok_or_else(|| ApiError::conflict(format!("run {id} is neither converged nor stopped")))?;
    Ok(accepted(&id, state))
}

async fn stop_run(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Response> {
    let handle = find_run(&store, &id)?;
    if !store.stop(&handle) {
        return Err(ApiError::conflict(format!("run {id} is not active")));
    }
    Ok(accepted(&id, handle.snapshot().state))
}
