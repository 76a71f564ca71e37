use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use pano_agents::AgentError;
use pano_core::PanoError;
use pano_session::SessionError;
use serde_json::json;
use tracing::error;

use crate::store::StoreError;

/// An HTTP status plus a human-readable message, rendered as
/// `{"error": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        let message = message.into();
        error!(%message, "internal error");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<AgentError> for ApiError {
    fn from(e: AgentError) -> Self {
        let status = match &e {
            AgentError::InvalidPrompt(_)
            | AgentError::PromptTooLong { .. }
            | AgentError::EmptyTranscription
            | AgentError::InvalidAudio(_)
            | AgentError::InvalidRequest(_)
            | AgentError::Pano(_) => StatusCode::UNPROCESSABLE_ENTITY,
            AgentError::Transient(_) => StatusCode::SERVICE_UNAVAILABLE,
            AgentError::BackendContract(_) => StatusCode::BAD_GATEWAY,
            AgentError::Config(_) => return Self::internal(e.to_string()),
        };
        Self::new(status, e.to_string())
    }
}

impl From<PanoError> for ApiError {
    fn from(e: PanoError) -> Self {
        Self::unprocessable(e.to_string())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            e if e.is_ordering() => Self::conflict(e.to_string()),
            SessionError::NoSuchSegment(_) => Self::not_found(e.to_string()),
            SessionError::InvalidConfig(_) => Self::unprocessable(e.to_string()),
            SessionError::Agent(a) => a.into(),
            SessionError::Pano(p) => p.into(),
            other => Self::internal(other.to_string()),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        Self::internal(e.to_string())
    }
}
