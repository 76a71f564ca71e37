//! Capability traits and the bundle a session runs against.

use std::sync::Arc;
use std::thread;
use std::time::Duration;

use pano_core::Clip;
use tracing::warn;

use crate::audio::AudioInput;
use crate::error::Result;
use crate::mock::{FixtureTranscriber, MockGenerator, TemplateRefiner};
use crate::prompt::{RefinedPrompt, TextPrompt};
use crate::remote::{RemoteGenerator, RemoteRefiner, RemoteTranscriber};
use crate::request::GenerationRequest;

/// Speech to text.
pub trait Transcriber: Send + Sync {
    fn transcribe(&self, audio: &AudioInput) -> Result<TextPrompt>;
}

/// Raw prompt to panorama-ready prompt.
pub trait PromptRefiner: Send + Sync {
    fn refine(&self, raw: &TextPrompt) -> Result<RefinedPrompt>;
}

/// Image-to-video generation.
pub trait VideoGenerator: Send + Sync {
    fn generate(&self, request: &GenerationRequest) -> Result<Clip>;
}

/// Retries transient failures with exponential backoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    /// No waiting between attempts; for tests and offline mocks.
    pub fn immediate(max_retries: u32) -> Self {
        Self {
            max_retries,
            initial_backoff: Duration::ZERO,
        }
    }

    /// Delay before retry number `attempt` (0-based).
    pub fn backoff(&self, attempt: u32) -> Duration {
        self.initial_backoff.saturating_mul(1u32 << attempt.min(16))
    }

    pub fn run<T>(&self, what: &str, mut op: impl FnMut() -> Result<T>) -> Result<T> {
        let mut attempt = 0;
        loop {
            match op() {
                Err(e) if e.is_transient() && attempt < self.max_retries => {
                    let delay = self.backoff(attempt);
                    warn!(%e, attempt, ?delay, "{what} failed, retrying");
                    thread::sleep(delay);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

/// The three backends plus the retry policy applied to each call.
#[derive(Clone)]
pub struct BackendSuite {
    pub transcriber: Arc<dyn Transcriber>,
    pub refiner: Arc<dyn PromptRefiner>,
    pub generator: Arc<dyn VideoGenerator>,
    pub retry: RetryPolicy,
}

impl BackendSuite {
    /// Deterministic offline backends: fixture transcripts, template
    /// refinement and the synthetic generator.
    pub fn mock() -> Self {
        Self {
            transcriber: Arc::new(FixtureTranscriber::builtin()),
            refiner: Arc::new(TemplateRefiner::default()),
            generator: Arc::new(MockGenerator),
            retry: RetryPolicy::default(),
        }
    }

    /// HTTP backends configured from `ASR_API_URL`, `LLM_API_URL`,
    /// `GEN_API_URL` and their `_API_KEY` / `_MODEL` companions.
    pub fn remote_from_env() -> Result<Self> {
        Ok(Self {
            transcriber: Arc::new(RemoteTranscriber::from_env()?),
            refiner: Arc::new(RemoteRefiner::from_env()?),
            generator: Arc::new(RemoteGenerator::from_env()?),
            retry: RetryPolicy::default(),
        })
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_generator(mut self, generator: Arc<dyn VideoGenerator>) -> Self {
        self.generator = generator;
        self
    }

    pub fn transcribe(&self, audio: &AudioInput) -> Result<TextPrompt> {
        self.retry.run("transcription", || self.transcriber.transcribe(audio))
    }

    pub fn refine(&self, raw: &TextPrompt) -> Result<RefinedPrompt> {
        self.retry.run("prompt refinement", || self.refiner.refine(raw))
    }

    /// Generates with retries and validates the clip against the request.
    pub fn generate(&self, request: &GenerationRequest) -> Result<Clip> {
        let clip = self
            .retry
            .run("generation", || self.generator.generate(request))?;
        request.check_output(&clip)?;
        Ok(clip)
    }
}

impl std::fmt::Debug for BackendSuite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BackendSuite")
            .field("retry", &self.retry)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::AgentError;
    use std::sync::atomic::{AtomicU32, Ordering};

    #[test]
    fn backoff_doubles_from_one_second() {
        let p = RetryPolicy::default();
        assert_eq!(p.max_retries, 3);
        let delays: Vec<u64> = (0..3).map(|a| p.backoff(a).as_secs()).collect();
        assert_eq!(delays, vec![1, 2, 4]);
    }

    #[test]
    fn retries_transient_then_gives_up() {
        let calls = AtomicU32::new(0);
        let r: Result<()> = RetryPolicy::immediate(3).run("t", || {
            calls.fetch_add(1, Ordering::SeqCst);
            Err(AgentError::Transient("down".into()))
        });
        assert!(matches!(r, Err(AgentError::Transient(_))));
        assert_eq!(calls.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn recovers_after_transient() {
        let calls = AtomicU32::new(0);
        let r = RetryPolicy::immediate(3).run("t", || {
            if calls.fetch_add(1, Ordering::SeqCst) < 2 {
                Err(AgentError::Transient("blip".into()))
            } else {
                Ok(42)
            }
        });
        assert_eq!(r, Ok(42));
    }

    #[test]
    fn permanent_errors_are_not_retried() {
        let calls = AtomicU32::new(0);
        let r: Result<()> = RetryPolicy::immediate(3).run("t", || {
            calls.fetch_add(1, Ordering::SeqCst);
            Err(AgentError::BackendContract("bad".into()))
        });
        assert!(r.is_err());
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }
}
