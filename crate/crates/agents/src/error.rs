use pano_core::PanoError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("invalid prompt: {0}")]
    InvalidPrompt(String),

    #[error("prompt too long: {len} characters (limit {limit})")]
    PromptTooLong { len: usize, limit: usize },

    #[error("transcription is empty")]
    EmptyTranscription,

    #[error("invalid audio: {0}")]
    InvalidAudio(String),

    #[error("invalid generation request: {0}")]
    InvalidRequest(String),

    /// Timeouts, unreachable hosts and 5xx responses; worth retrying.
    #[error("backend temporarily unavailable: {0}")]
    Transient(String),

    /// The backend answered, but not with what the contract promises.
    #[error("backend contract violated: {0}")]
    BackendContract(String),

    #[error("backend configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Pano(#[from] PanoError),
}

impl AgentError {
    pub fn is_transient(&self) -> bool {
        matches!(self, AgentError::Transient(_))
    }
}

pub type Result<T, E = AgentError> = std::result::Result<T, E>;
