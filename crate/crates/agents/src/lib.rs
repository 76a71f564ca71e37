//! Backends for the three AI capabilities the co-creation loop leans on:
//! speech transcription, prompt refinement and image-to-video generation.
//!
//! Each capability is a trait with a deterministic offline mock and a thin
//! HTTP adapter. [`BackendSuite`] bundles one of each with a retry policy.

pub mod audio;
pub mod backend;
pub mod codec;
pub mod error;
pub mod mock;
pub mod prompt;
pub mod remote;
pub mod request;

pub use audio::{AudioInput, SAMPLE_RATE};
pub use backend::{BackendSuite, PromptRefiner, RetryPolicy, Transcriber, VideoGenerator};
pub use error::{AgentError, Result};
pub use mock::{fixture_audio, Delayed, FixtureTranscriber, MockGenerator, TemplateRefiner};
pub use prompt::{DescriptorSet, RefinedPrompt, TextPrompt, DEFAULT_DESCRIPTORS, MAX_PROMPT_CHARS};
pub use request::{GenerationRequest, DEFAULT_DURATION_S};
