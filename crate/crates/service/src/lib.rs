//! Orchestration around the session state machine: a crash-safe on-disk
//! store, a bounded pool of generation jobs and the JSON API the viewer
//! drives.

pub mod api;
pub mod app;
pub mod error;
pub mod manifest;
pub mod store;

use std::future::Future;
use std::io;
use std::sync::Arc;

use tokio::net::TcpListener;

pub use api::{router, BODY_LIMIT};
pub use app::{
    AppState, CreateSessionBody, FeedbackBody, FeedbackReply, JobPhase, JobStatus, ServiceConfig,
    DEFAULT_MAX_JOBS, MAX_IMAGE_BYTES,
};
pub use error::ApiError;
pub use manifest::{SegmentDigests, SegmentManifest, SessionManifest};
pub use store::{is_valid_id, SessionStore, StoreError, INTERRUPTED};

pub const DEFAULT_PORT: u16 = 8360;

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
