//! HTTP routes.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use crate::error::ApiError;
use crate::service::{AnnotationService, ExportFilter, JudgmentSubmission};

type Shared = State<Arc<AnnotationService>>;

const MAX_PAGE: usize = 500;

#[derive(Debug, Deserialize)]
struct CreateSession {
    #[serde(default)]
    rater_id: String,
}

#[derive(Debug, Deserialize)]
struct Page {
    offset: Option<usize>,
    limit: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct SeenBody {
    items: Vec<String>,
}

pub fn router(service: Arc<AnnotationService>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/items", get(items))
        .route("/sessions/{id}/seen", post(submit_seen))
        .route("/sessions/{id}/task", get(next_task))
        .route("/sessions/{id}/judgments", post(submit_judgment))
        .route("/export/judgments", get(export))
        .with_state(service)
}

/// Runs a blocking service call off the async workers (log appends fsync).
async fn blocking<T, F>(svc: Arc<AnnotationService>, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&AnnotationService) -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&svc))
        .await
        .expect("service call panicked")
}

async fn create_session(State(svc): Shared, Json(body): Json<CreateSession>) -> Result<impl IntoResponse, ApiError> {
    let view = blocking(svc, move |s| s.create_session(&body.rater_id)).await?;
    Ok(Json(view))
}

async fn items(State(svc): Shared, Query(p): Query<Page>) -> impl IntoResponse {
    let limit = p.limit.unwrap_or(50).min(MAX_PAGE);
    Json(svc.items_page(p.offset.unwrap_or(0), limit))
}

async fn submit_seen(
    State(svc): Shared,
    Path(id): Path<String>,
    Json(body): Json<SeenBody>,
) -> Result<impl IntoResponse, ApiError> {
    let ack = blocking(svc, move |s| s.submit_seen(&id, &body.items)).await?;
    Ok(Json(ack))
}

async fn next_task(State(svc): Shared, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let task = blocking(svc, move |s| s.next_task(&id)).await?;
    Ok(Json(task))
}

async fn submit_judgment(
    State(svc): Shared,
    Path(id): Path<String>,
    Json(body): Json<JudgmentSubmission>,
) -> Result<impl IntoResponse, ApiError> {
    let ack = blocking(svc, move |s| s.submit_judgment(&id, &body)).await?;
    Ok(Json(ack))
}

async fn export(State(svc): Shared, Query(filter): Query<ExportFilter>) -> impl IntoResponse {
    (
        [(header::CONTENT_TYPE, "application/x-ndjson")],
        svc.export_judgments(&filter),
    )
}
