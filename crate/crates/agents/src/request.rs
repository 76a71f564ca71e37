use pano_core::{Clip, EquirectFrame, DEFAULT_FPS};

use crate::error::{AgentError, Result};
use crate::prompt::RefinedPrompt;

pub const DEFAULT_DURATION_S: f64 = 10.0;

/// Everything an image-to-video backend needs for one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    refined: RefinedPrompt,
    image_prompt: EquirectFrame,
    duration_s: f64,
    fps: u32,
    seed: u64,
}

impl GenerationRequest {
    pub fn new(
        refined: RefinedPrompt,
        image_prompt: EquirectFrame,
        duration_s: f64,
        fps: u32,
        seed: u64,
    ) -> Result<Self> {
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(AgentError::InvalidRequest(format!(
                "duration must be positive, got {duration_s}"
            )));
        }
        if fps == 0 {
            return Err(AgentError::InvalidRequest("fps must be positive".into()));
        }
        let req = Self {
            refined,
            image_prompt,
            duration_s,
            fps,
            seed,
        };
        if req.expected_frames() == 0 {
            return Err(AgentError::InvalidRequest(format!(
                "{duration_s} s at {fps} fps rounds to zero frames"
            )));
        }
        Ok(req)
    }

    /// Request with the default 10 s duration at 24 fps.
    pub fn with_defaults(refined: RefinedPrompt, image_prompt: EquirectFrame, seed: u64) -> Self {
        Self::new(refined, image_prompt, DEFAULT_DURATION_S, DEFAULT_FPS, seed)
            .expect("defaults are valid")
    }

    pub fn refined(&self) -> &RefinedPrompt {
        &self.refined
    }

    pub fn image_prompt(&self) -> &EquirectFrame {
        &self.image_prompt
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `round(duration_s * fps)`.
    pub fn expected_frames(&self) -> usize {
        (self.duration_s * f64::from(self.fps)).round() as usize
    }

    /// Checks a backend's clip against this request: exact frame count,
    /// frame rate and image-prompt dimensions.
    pub fn check_output(&self, clip: &Clip) -> Result<()> {
        if clip.len() != self.expected_frames() {
            return Err(AgentError::BackendContract(format!(
                "expected {} frames, got {}",
                self.expected_frames(),
                clip.len()
            )));
        }
        if clip.fps() != self.fps {
            return Err(AgentError::BackendContract(format!(
                "expected {} fps, got {}",
                self.fps,
                clip.fps()
            )));
        }
        if clip.dimensions() != self.image_prompt.dimensions() {
            let (w, h) = clip.dimensions();
            let (ew, eh) = self.image_prompt.dimensions();
            return Err(AgentError::BackendContract(format!(
                "expected {ew}x{eh} frames, got {w}x{h}"
            )));
        }
        Ok(())
    }
}
