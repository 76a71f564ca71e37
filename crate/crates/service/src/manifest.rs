//! The JSON document describing a session, on disk and over the API.

use chrono::{DateTime, Utc};
use pano_agents::{RefinedPrompt, TextPrompt};
use pano_core::YawAngle;
use pano_session::{PromptOrigin, Segment, SegmentStatus, Session, SessionConfig, SessionState};
use serde::{Deserialize, Serialize};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub version: u32,
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub state: SessionState,
    pub current_yaw: YawAngle,
    pub config: SessionConfig,
    pub segments: Vec<SegmentManifest>,
    /// Frame count of the assembled clip once the session is complete.
    pub final_frame_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentManifest {
    pub index: usize,
    pub origin: PromptOrigin,
    pub text_prompt: TextPrompt,
    pub refined_prompt: RefinedPrompt,
    pub yaw_at_generation: YawAngle,
    pub heading: YawAngle,
    pub status: SegmentStatus,
    pub error: Option<String>,
    pub width: u32,
    pub height: u32,
    /// Stored frames; zero unless ready.
    pub frame_count: usize,
    pub image_prompt_sha256: String,
    pub clip_sha256: Option<String>,
}

/// Content hashes that are expensive to recompute, kept next to a session.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SegmentDigests {
    pub image_prompt: String,
    pub clip: Option<String>,
}

impl SegmentDigests {
    pub fn of(segment: &Segment) -> Self {
        Self {
            image_prompt: segment.image_prompt.content_hash(),
            clip: segment.clip.as_ref().map(|c| c.content_hash()),
        }
    }
}

impl SessionManifest {
    /// `digests[i]` must describe `session.segments()[i]`.
    pub fn describe(session: &Session, digests: &[SegmentDigests]) -> Self {
        let segments = session
            .segments()
            .iter()
            .zip(digests)
            .map(|(s, d)| SegmentManifest {
                index: s.index,
                origin: s.origin,
                text_prompt: s.text_prompt.clone(),
                refined_prompt: s.refined.clone(),
                yaw_at_generation: s.yaw_at_generation,
                heading: s.heading,
                status: s.status,
                error: s.error.clone(),
                width: s.image_prompt.width(),
                height: s.image_prompt.height(),
                frame_count: s.clip.as_ref().map_or(0, |c| c.len()),
                image_prompt_sha256: d.image_prompt.clone(),
                clip_sha256: if s.clip.is_some() { d.clip.clone() } else { None },
            })
            .collect();
        Self {
            version: MANIFEST_VERSION,
            id: session.id().to_owned(),
            created_at: session.created_at(),
            state: session.state(),
            current_yaw: session.current_yaw(),
            config: session.config().clone(),
            segments,
            final_frame_count: session.final_clip().map(|c| c.len()),
        }
    }
}
