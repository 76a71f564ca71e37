//! The co-creation loop as a state machine.
//!
//! A [`Session`] starts from a text prompt and an optional image, then
//! alternates between generating the newest segment and appending a new one
//! from user feedback: a reused, typed or spoken prompt, optionally with a
//! recenter. Each new segment's image prompt is the previous clip's last
//! frame rotated by that recenter. Finalizing concatenates all segments.
//!
//! `Session` does no locking of its own; callers serialize access.

pub mod config;
pub mod error;
pub mod session;

pub use config::{SessionConfig, DEFAULT_TARGET_SEGMENTS, MAX_TARGET_SEGMENTS};
pub use error::{Result, SessionError};
pub use session::{
    new_session_id, BlendedClip, FeedbackAction, PromptInput, PromptOrigin, ResolvedPrompt,
    Segment, SegmentStatus, Session, SessionParts, SessionState, NEUTRAL_GRAY,
};
