use pano_agents::AgentError;
use pano_core::PanoError;
use thiserror::Error;

use crate::session::SessionState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    /// Another segment of this session is being generated.
    #[error("segment {0} is already generating")]
    Busy(usize),

    /// The request does not fit the current segment states.
    #[error("out of order: {0}")]
    OutOfOrder(String),

    #[error("session already has its {0} segments")]
    SessionFull(usize),

    #[error("session incomplete: {ready} of {target} segments ready")]
    Incomplete { ready: usize, target: usize },

    #[error("session is {0}")]
    NotActive(SessionState),

    #[error("no segment {0}")]
    NoSuchSegment(usize),

    #[error("invalid session config: {0}")]
    InvalidConfig(String),

    /// Persisted state that violates a session invariant.
    #[error("corrupt session state: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Agent(#[from] AgentError),

    #[error(transparent)]
    Pano(#[from] PanoError),
}

impl SessionError {
    /// Errors caused by calling operations in the wrong state, as opposed to
    /// bad input or backend trouble.
    pub fn is_ordering(&self) -> bool {
        matches!(
            self,
            SessionError::Busy(_)
                | SessionError::OutOfOrder(_)
                | SessionError::SessionFull(_)
                | SessionError::Incomplete { .. }
                | SessionError::NotActive(_)
        )
    }
}

pub type Result<T, E = SessionError> = std::result::Result<T, E>;
