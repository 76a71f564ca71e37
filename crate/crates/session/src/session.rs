//! Segments, feedback and the per-segment lifecycle.
//!
//! ```text
//! pending --begin--> generating --complete--> ready
//!    ^                    |
//!    +------retry------ failed <--fail--+
//! ```
//!
//! Only the newest segment can be unfinished: feedback appends a segment
//! only once the previous one is ready.

use std::fmt;

use chrono::{DateTime, Utc};
use pano_agents::{AgentError, AudioInput, BackendSuite, GenerationRequest, RefinedPrompt, TextPrompt};
use pano_core::seam::edge_blend_in_place;
use pano_core::{concat, last_frame, recenter, to_equirect, Clip, EquirectFrame, Frame, YawAngle};
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use crate::config::SessionConfig;
use crate::error::{Result, SessionError};

/// Fill of the bootstrap canvas used when a session starts from text alone.
pub const NEUTRAL_GRAY: [u8; 3] = [128, 128, 128];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentStatus {
    Pending,
    Generating,
    Ready,
    Failed,
}

impl SegmentStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentStatus::Pending => "pending",
            SegmentStatus::Generating => "generating",
            SegmentStatus::Ready => "ready",
            SegmentStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for SegmentStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionState {
    Active,
    Finalizing,
    Complete,
    Aborted,
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SessionState::Active => "active",
            SessionState::Finalizing => "finalizing",
            SessionState::Complete => "complete",
            SessionState::Aborted => "aborted",
        })
    }
}

/// Where a segment's text prompt came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptOrigin {
    Initial,
    Reuse,
    Text,
    Speech,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PromptInput {
    Reuse,
    Text(String),
    Speech(AudioInput),
}

/// One step of user feedback: a prompt choice plus an optional recenter.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackAction {
    pub prompt: PromptInput,
    pub recenter: Option<YawAngle>,
}

impl FeedbackAction {
    pub fn reuse() -> Self {
        Self {
            prompt: PromptInput::Reuse,
            recenter: None,
        }
    }

    pub fn text(text: impl Into<String>) -> Self {
        Self {
            prompt: PromptInput::Text(text.into()),
            recenter: None,
        }
    }

    pub fn speech(audio: AudioInput) -> Self {
        Self {
            prompt: PromptInput::Speech(audio),
            recenter: None,
        }
    }

    pub fn with_recenter(mut self, yaw: YawAngle) -> Self {
        self.recenter = Some(yaw);
        self
    }
}

/// A prompt resolved through the backends, ready to open a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPrompt {
    pub origin: PromptOrigin,
    pub text: TextPrompt,
    pub refined: RefinedPrompt,
}

impl ResolvedPrompt {
    /// Resolves typed and spoken prompts through the backends without
    /// touching any session, so slow backends can run outside a lock.
    /// Returns `None` for [`PromptInput::Reuse`], which needs the session.
    pub fn fresh(input: &PromptInput, backends: &BackendSuite) -> Result<Option<Self>> {
        let (origin, text) = match input {
            PromptInput::Reuse => return Ok(None),
            PromptInput::Text(raw) => (PromptOrigin::Text, TextPrompt::new(raw)?),
            PromptInput::Speech(audio) => (PromptOrigin::Speech, backends.transcribe(audio)?),
        };
        let refined = backends.refine(&text)?;
        Ok(Some(Self {
            origin,
            text,
            refined,
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub index: usize,
    pub origin: PromptOrigin,
    pub text_prompt: TextPrompt,
    pub refined: RefinedPrompt,
    pub image_prompt: EquirectFrame,
    /// Rotation applied to the previous segment's last frame to form this
    /// segment's image prompt. Zero for segment 0.
    pub yaw_at_generation: YawAngle,
    /// Cumulative view heading after this segment's recenter.
    pub heading: YawAngle,
    pub status: SegmentStatus,
    pub clip: Option<Clip>,
    pub error: Option<String>,
}

/// A generated clip that passed the request contract and was edge-blended
/// frame by frame. The only way to hand a clip to a segment.
#[derive(Debug, Clone)]
pub struct BlendedClip {
    index: usize,
    clip: Clip,
}

impl BlendedClip {
    pub fn new(
        index: usize,
        request: &GenerationRequest,
        raw: Clip,
        band_frac: f64,
    ) -> Result<Self, AgentError> {
        request.check_output(&raw)?;
        let clip = raw.map_frames(|frame| {
            let mut eq = EquirectFrame::new(frame.clone()).expect("contract checked 2:1 dimensions");
            edge_blend_in_place(&mut eq, band_frac).expect("band validated with the session config");
            eq.into_frame()
        })?;
        Ok(Self { index, clip })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn clip(&self) -> &Clip {
        &self.clip
    }
}

/// Everything needed to rebuild a session, e.g. from disk.
#[derive(Debug, Clone)]
pub struct SessionParts {
    pub id: String,
    pub config: SessionConfig,
    pub created_at: DateTime<Utc>,
    pub state: SessionState,
    pub current_yaw: YawAngle,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    config: SessionConfig,
    created_at: DateTime<Utc>,
    state: SessionState,
    current_yaw: YawAngle,
    segments: Vec<Segment>,
    final_clip: Option<Clip>,
}

/// A fresh 128-bit random id in lowercase hex.
pub fn new_session_id() -> String {
    hex::encode(rand::random::<u128>().to_be_bytes())
}

impl Session {
    /// Opens a session with segment 0 pending. Without an image the first
    /// image prompt is a neutral gray canvas.
    pub fn start(
        initial_text: TextPrompt,
        initial_image: Option<&Frame>,
        config: SessionConfig,
        backends: &BackendSuite,
    ) -> Result<Self> {
        Self::start_with_id(new_session_id(), initial_text, initial_image, config, backends)
    }

    pub fn start_with_id(
        id: String,
        initial_text: TextPrompt,
        initial_image: Option<&Frame>,
        config: SessionConfig,
        backends: &BackendSuite,
    ) -> Result<Self> {
        config.validate()?;
        let image_prompt = match initial_image {
            Some(image) => to_equirect(image, &config.params)?,
            None => EquirectFrame::filled(config.params.out_width, NEUTRAL_GRAY)?,
        };
        let refined = backends.refine(&initial_text)?;
        let segment = Segment {
            index: 0,
            origin: PromptOrigin::Initial,
            text_prompt: initial_text,
            refined,
            image_prompt,
            yaw_at_generation: YawAngle::ZERO,
            heading: YawAngle::ZERO,
            status: SegmentStatus::Pending,
            clip: None,
            error: None,
        };
        info!(%id, "session started");
        Ok(Self {
            id,
            config,
            created_at: Utc::now(),
            state: SessionState::Active,
            current_yaw: YawAngle::ZERO,
            segments: vec![segment],
            final_clip: None,
        })
    }

    /// Rebuilds a session after checking every structural invariant.
    pub fn from_parts(parts: SessionParts) -> Result<Self> {
        parts.config.validate()?;
        let mut session = Self {
            id: parts.id,
            config: parts.config,
            created_at: parts.created_at,
            state: parts.state,
            current_yaw: parts.current_yaw,
            segments: parts.segments,
            final_clip: None,
        };
        session.check_invariants()?;
        if session.state == SessionState::Finalizing {
            // Assembly is synchronous, so a persisted finalizing state means
            // it was interrupted; finishing it is cheap and deterministic.
            session.state = SessionState::Active;
            session.finalize()?;
        } else if session.state == SessionState::Complete {
            session.final_clip = Some(session.assemble()?);
        }
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn created_at(&self) -> DateTime<Utc> {
        self.created_at
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn current_yaw(&self) -> YawAngle {
        self.current_yaw
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, index: usize) -> Result<&Segment> {
        self.segments.get(index).ok_or(SessionError::NoSuchSegment(index))
    }

    pub fn final_clip(&self) -> Option<&Clip> {
        self.final_clip.as_ref()
    }

    pub fn generating_index(&self) -> Option<usize> {
        self.segments
            .iter()
            .position(|s| s.status == SegmentStatus::Generating)
    }

    pub fn ready_count(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| s.status == SegmentStatus::Ready)
            .count()
    }

    fn require_active(&self) -> Result<()> {
        match self.state {
            SessionState::Active => Ok(()),
            other => Err(SessionError::NotActive(other)),
        }
    }

    fn segment_mut(&mut self, index: usize) -> Result<&mut Segment> {
        self.segments
            .get_mut(index)
            .ok_or(SessionError::NoSuchSegment(index))
    }

    /// The request a generation of segment `index` would send.
    pub fn generation_request(&self, index: usize) -> Result<GenerationRequest> {
        let segment = self.segment(index)?;
        Ok(GenerationRequest::new(
            segment.refined.clone(),
            segment.image_prompt.clone(),
            self.config.segment_duration_s,
            self.config.fps,
            self.config.segment_seed(index),
        )?)
    }

    /// `pending -> generating`. Returns the request to run off-lock.
    pub fn begin_generation(&mut self, index: usize) -> Result<GenerationRequest> {
        self.require_active()?;
        let status = self.segment(index)?.status;
        if let Some(busy) = self.generating_index() {
            return Err(SessionError::Busy(busy));
        }
        if status != SegmentStatus::Pending {
            return Err(SessionError::OutOfOrder(format!(
                "segment {index} is {status}, not pending"
            )));
        }
        let request = self.generation_request(index)?;
        self.segment_mut(index)?.status = SegmentStatus::Generating;
        Ok(request)
    }

    /// `generating -> ready`.
    pub fn complete_generation(&mut self, clip: BlendedClip) -> Result<()> {
        let index = clip.index;
        let expected = self.config.frames_per_segment();
        let dims = self.segment(index)?.image_prompt.dimensions();
        self.expect_generating(index)?;
        if clip.clip.len() != expected || clip.clip.dimensions() != dims {
            return Err(SessionError::Agent(AgentError::BackendContract(format!(
                "clip for segment {index} does not match its request"
            ))));
        }
        let segment = self.segment_mut(index)?;
        segment.status = SegmentStatus::Ready;
        segment.clip = Some(clip.clip);
        segment.error = None;
        info!(session = %self.id, index, "segment ready");
        Ok(())
    }

    /// `generating -> failed`, keeping the error message.
    pub fn fail_generation(&mut self, index: usize, error: impl fmt::Display) -> Result<()> {
        self.expect_generating(index)?;
        let message = error.to_string();
        warn!(session = %self.id, index, %message, "segment failed");
        let segment = self.segment_mut(index)?;
        segment.status = SegmentStatus::Failed;
        segment.error = Some(message);
        Ok(())
    }

    fn expect_generating(&self, index: usize) -> Result<()> {
        let status = self.segment(index)?.status;
        if status != SegmentStatus::Generating {
            return Err(SessionError::OutOfOrder(format!(
                "segment {index} is {status}, not generating"
            )));
        }
        Ok(())
    }

    /// `failed -> pending`, with the same prompt and image.
    pub fn retry_segment(&mut self, index: usize) -> Result<()> {
        self.require_active()?;
        let segment = self.segment_mut(index)?;
        if segment.status != SegmentStatus::Failed {
            return Err(SessionError::OutOfOrder(format!(
                "segment {index} is {}, only failed segments can be retried",
                segment.status
            )));
        }
        segment.status = SegmentStatus::Pending;
        segment.error = None;
        Ok(())
    }

    /// Generates segment `index` in place. Backend failures leave the
    /// segment failed and are not returned as errors; ordering problems are.
    pub fn run_generation(&mut self, index: usize, backends: &BackendSuite) -> Result<SegmentStatus> {
        let request = self.begin_generation(index)?;
        let band = self.config.params.blend_band_frac;
        match backends
            .generate(&request)
            .and_then(|raw| BlendedClip::new(index, &request, raw, band))
        {
            Ok(clip) => self.complete_generation(clip)?,
            Err(e) => self.fail_generation(index, e)?,
        }
        Ok(self.segments[index].status)
    }

    /// Whether a new segment may be appended right now.
    pub fn check_can_extend(&self) -> Result<()> {
        self.require_active()?;
        if self.segments.len() >= self.config.target_segments {
            return Err(SessionError::SessionFull(self.config.target_segments));
        }
        let last = self.segments.last().expect("sessions always have segment 0");
        if last.status != SegmentStatus::Ready {
            return Err(SessionError::OutOfOrder(format!(
                "segment {} is {}, not ready",
                last.index, last.status
            )));
        }
        Ok(())
    }

    /// Turns a prompt choice into text and refined prompt. Reuse keeps the
    /// previous refined prompt verbatim.
    pub fn resolve_prompt(&self, input: &PromptInput, backends: &BackendSuite) -> Result<ResolvedPrompt> {
        if let Some(fresh) = ResolvedPrompt::fresh(input, backends)? {
            return Ok(fresh);
        }
        let last = self.segments.last().expect("sessions always have segment 0");
        Ok(ResolvedPrompt {
            origin: PromptOrigin::Reuse,
            text: last.text_prompt.clone(),
            refined: last.refined.clone(),
        })
    }

    /// Appends the next pending segment, chained from the previous clip's
    /// last frame rotated by `recenter`.
    pub fn extend(&mut self, prompt: ResolvedPrompt, recenter_by: Option<YawAngle>) -> Result<usize> {
        self.check_can_extend()?;
        let delta = recenter_by.unwrap_or(YawAngle::ZERO);
        let prev = self.segments.last().expect("sessions always have segment 0");
        let prev_clip = prev.clip.as_ref().expect("ready segments hold a clip");
        let last = EquirectFrame::new(last_frame(prev_clip).clone())?;
        let heading = self.current_yaw + delta;
        let index = self.segments.len();
        self.segments.push(Segment {
            index,
            origin: prompt.origin,
            text_prompt: prompt.text,
            refined: prompt.refined,
            image_prompt: recenter(&last, delta),
            yaw_at_generation: delta,
            heading,
            status: SegmentStatus::Pending,
            clip: None,
            error: None,
        });
        self.current_yaw = heading;
        Ok(index)
    }

    /// Checks ordering, resolves the prompt and appends the next segment.
    pub fn apply_feedback(&mut self, action: &FeedbackAction, backends: &BackendSuite) -> Result<usize> {
        self.check_can_extend()?;
        let prompt = self.resolve_prompt(&action.prompt, backends)?;
        self.extend(prompt, action.recenter)
    }

    /// Concatenates every segment into the final clip. Idempotent: later
    /// calls return the cached clip.
    pub fn finalize(&mut self) -> Result<Clip> {
        match self.state {
            SessionState::Complete => {
                return Ok(self.final_clip.clone().expect("complete sessions cache the final clip"))
            }
            SessionState::Active => {}
            other => return Err(SessionError::NotActive(other)),
        }
        let ready = self.ready_count();
        if ready < self.config.target_segments {
            return Err(SessionError::Incomplete {
                ready,
                target: self.config.target_segments,
            });
        }
        self.state = SessionState::Finalizing;
        match self.assemble() {
            Ok(clip) => {
                self.final_clip = Some(clip.clone());
                self.state = SessionState::Complete;
                info!(session = %self.id, frames = clip.len(), "session complete");
                Ok(clip)
            }
            Err(e) => {
                self.state = SessionState::Active;
                Err(e)
            }
        }
    }

    fn assemble(&self) -> Result<Clip> {
        let clips: Vec<Clip> = self
            .segments
            .iter()
            .map(|s| s.clip.clone().expect("all segments ready"))
            .collect();
        Ok(concat(&clips)?)
    }

    pub fn abort(&mut self) {
        self.state = SessionState::Aborted;
    }

    /// Structural invariants that hold between any two operations.
    pub fn check_invariants(&self) -> Result<()> {
        let corrupt = |msg: String| Err(SessionError::Corrupt(msg));
        if self.segments.is_empty() {
            return corrupt("no segments".into());
        }
        if self.segments.len() > self.config.target_segments {
            return corrupt(format!(
                "{} segments exceed the target of {}",
                self.segments.len(),
                self.config.target_segments
            ));
        }
        let mut heading = YawAngle::ZERO;
        let mut generating = 0;
        for (i, s) in self.segments.iter().enumerate() {
            if s.index != i {
                return corrupt(format!("segment at position {i} has index {}", s.index));
            }
            if (s.status == SegmentStatus::Ready) != s.clip.is_some() {
                return corrupt(format!("segment {i} is {} but clip presence disagrees", s.status));
            }
            if s.status == SegmentStatus::Generating {
                generating += 1;
            }
            if i + 1 < self.segments.len() && s.status != SegmentStatus::Ready {
                return corrupt(format!("segment {i} is {} but has a successor", s.status));
            }
            if i == 0 && s.yaw_at_generation != YawAngle::ZERO {
                return corrupt("segment 0 has a nonzero yaw".into());
            }
            heading = heading + s.yaw_at_generation;
            if s.heading != heading {
                return corrupt(format!("segment {i} heading {} != {heading}", s.heading));
            }
            if let Some(clip) = &s.clip {
                if clip.len() != self.config.frames_per_segment()
                    || clip.fps() != self.config.fps
                    || clip.dimensions() != s.image_prompt.dimensions()
                {
                    return corrupt(format!("segment {i} clip does not match the config"));
                }
            }
        }
        if generating > 1 {
            return corrupt(format!("{generating} segments generating"));
        }
        if self.current_yaw != heading {
            return corrupt(format!("current yaw {} != heading {heading}", self.current_yaw));
        }
        if matches!(self.state, SessionState::Complete | SessionState::Finalizing)
            && self.ready_count() != self.config.target_segments
        {
            return corrupt(format!("{} session with unready segments", self.state));
        }
        Ok(())
    }

    /// Recomputes every chained image prompt from its predecessor's clip.
    pub fn verify_chaining(&self) -> Result<()> {
        for pair in self.segments.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            let clip = prev
                .clip
                .as_ref()
                .ok_or_else(|| SessionError::Corrupt(format!("segment {} has no clip", prev.index)))?;
            let last = EquirectFrame::new(last_frame(clip).clone())?;
            if recenter(&last, next.yaw_at_generation) != next.image_prompt {
                return Err(SessionError::Corrupt(format!(
                    "segment {} image prompt is not chained from segment {}",
                    next.index, prev.index
                )));
            }
        }
        Ok(())
    }
}
