//! HTTP routes under `/api/v1`.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | create; 201 + manifest |
//! | GET | `/sessions` | list ids |
//! | GET | `/sessions/{id}` | manifest |
//! | POST | `/sessions/{id}/segments/{k}/generate` | 202 + job status |
//! | GET | `/sessions/{id}/jobs` | job statuses |
//! | POST | `/sessions/{id}/feedback` | 201 + new segment |
//! | GET | `/sessions/{id}/segments/{k}/frames/{f}` | PNG |
//! | GET | `/sessions/{id}/segments/{k}/image_prompt` | PNG |
//! | POST | `/sessions/{id}/finalize` | manifest; 409 until all ready |
//! | GET | `/sessions/{id}/final/frames/{f}` | PNG |

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde_json::json;
use tower_http::services::ServeDir;
use tracing::error;

use crate::app::{AppState, CreateSessionBody, FeedbackBody};
use crate::error::ApiError;

/// Request bodies above this are rejected before parsing. Large enough for
/// the biggest accepted image after base64 inflation.
pub const BODY_LIMIT: usize = 64 * 1024 * 1024;

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<T, ApiError>;

const PLACEHOLDER_PAGE: &str = "<!doctype html><meta charset=utf-8><title>panorama service</title>\
<p>No viewer bundle configured. The JSON API is served under <code>/api/v1</code>.";

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_manifest))
        .route("/sessions/{id}/segments/{k}/generate", post(generate))
        .route("/sessions/{id}/jobs", get(jobs))
        .route("/sessions/{id}/feedback", post(feedback))
        .route("/sessions/{id}/segments/{k}/frames/{f}", get(segment_frame))
        .route("/sessions/{id}/segments/{k}/image_prompt", get(image_prompt))
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/sessions/{id}/final/frames/{f}", get(final_frame))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(DefaultBodyLimit::max(BODY_LIMIT));
    let app = Router::new().nest("/api/v1", api);
    let app = match &state.config().ui_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(PLACEHOLDER_PAGE) })),
    };
    app.with_state(state)
}

/// Runs session work on the blocking pool; it may touch the disk.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        error!(error = %e, "request task failed");
        ApiError::internal("request task failed")
    })?
}

/// Syntax and type errors are 400; validation of well-formed values
/// happens later and yields 422.
fn parse_body<T: DeserializeOwned>(bytes: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

async fn create_session(State(app): Shared, body: Bytes) -> ApiResult<Response> {
    let body: CreateSessionBody = parse_body(&body)?;
    let manifest = blocking(move || app.create_session(body)).await?;
    let reply = json!({ "session_id": manifest.id, "manifest": manifest });
    Ok((StatusCode::CREATED, Json(reply)).into_response())
}

async fn list_sessions(State(app): Shared) -> Json<serde_json::Value> {
    Json(json!({ "sessions": app.session_ids() }))
}

async fn get_manifest(State(app): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let manifest = blocking(move || app.manifest(&id)).await?;
    Ok(Json(manifest).into_response())
}

async fn generate(State(app): Shared, Path((id, k)): Path<(String, usize)>) -> ApiResult<Response> {
    let claimer = app.clone();
    let ticket = blocking(move || claimer.claim_generation(&id, k)).await?;
    let status = ticket.status.clone();
    let slots = app.job_slots();
    tokio::spawn(async move {
        let Ok(_permit) = slots.acquire_owned().await else {
            return;
        };
        app.mark_running(&ticket);
        let runner = app.clone();
        if let Err(e) = tokio::task::spawn_blocking(move || runner.execute_job(ticket)).await {
            error!(error = %e, "generation job panicked");
        }
    });
    Ok((StatusCode::ACCEPTED, Json(status)).into_response())
}

async fn jobs(State(app): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(app.jobs(&id)?).into_response())
}

async fn feedback(State(app): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let body: FeedbackBody = parse_body(&body)?;
    let reply = blocking(move || app.feedback(&id, body)).await?;
    Ok((StatusCode::CREATED, Json(reply)).into_response())
}

async fn finalize(State(app): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let manifest = blocking(move || app.finalize(&id)).await?;
    Ok(Json(manifest).into_response())
}

async fn png_file(path: PathBuf) -> ApiResult<Response> {
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

async fn segment_frame(
    State(app): Shared,
    Path((id, k, f)): Path<(String, usize, usize)>,
) -> ApiResult<Response> {
    png_file(app.frame_path(&id, k, f)?).await
}

async fn image_prompt(State(app): Shared, Path((id, k)): Path<(String, usize)>) -> ApiResult<Response> {
    png_file(app.image_prompt_path(&id, k)?).await
}

async fn final_frame(State(app): Shared, Path((id, f)): Path<(String, usize)>) -> ApiResult<Response> {
    png_file(app.final_frame_path(&id, f)?).await
}
