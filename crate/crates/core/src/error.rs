use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PanoError {
    #[error("invalid angle: {0}")]
    InvalidAngle(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("frame is not equirectangular: {width}x{height} (width must be twice the height)")]
    NotEquirect { width: u32, height: u32 },

    #[error("clip has no frames")]
    EmptyClip,

    #[error("incompatible clips: {0}")]
    IncompatibleClips(String),
}

pub type Result<T, E = PanoError> = std::result::Result<T, E>;
