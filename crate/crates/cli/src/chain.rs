//! Headless co-creation loop over the mock backends.

use pano_agents::{fixture_audio, BackendSuite, TextPrompt};
use pano_core::{Clip, Frame, ProjectionParams, YawAngle};
use pano_session::{
    FeedbackAction, PromptOrigin, SegmentStatus, Session, SessionConfig, SessionError,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::script::{ScriptAction, ScriptStep};

#[derive(Debug, Clone)]
pub struct ChainOptions {
    pub prompt: String,
    pub image: Option<Frame>,
    pub segments: usize,
    pub seed: u64,
    pub width: u32,
    pub duration_s: f64,
    pub fps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub index: usize,
    pub origin: PromptOrigin,
    pub text_prompt: String,
    pub refined_prompt: String,
    pub yaw_at_generation: YawAngle,
    pub heading: YawAngle,
    pub frame_count: usize,
    pub clip_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub frame_count: usize,
    pub fps: u32,
    pub duration_s: f64,
    pub width: u32,
    pub height: u32,
    pub final_yaw: YawAngle,
    pub sha256: String,
    pub segments: Vec<SegmentReport>,
}

#[derive(Debug)]
pub struct ChainOutcome {
    pub session: Session,
    pub clip: Clip,
    pub report: ChainReport,
}

fn config_error(e: SessionError) -> CliError {
    match e {
        SessionError::InvalidConfig(m) => CliError::Usage(m),
        SessionError::Agent(a) => CliError::Usage(a.to_string()),
        SessionError::Pano(p) => CliError::Usage(p.to_string()),
        other => CliError::Internal(other.to_string()),
    }
}

/// One feedback action per segment after the first. Segments the script
/// does not mention reuse the previous prompt without recentering.
fn actions(steps: &[ScriptStep], segments: usize) -> Result<Vec<(Option<usize>, FeedbackAction)>> {
    if let Some(step) = steps.iter().find(|s| s.segment >= segments) {
        return Err(CliError::Script {
            line: step.line,
            message: format!("segment {} is beyond the last segment ({})", step.segment, segments - 1),
        });
    }
    (1..segments)
        .map(|k| {
            let Some(step) = steps.iter().find(|s| s.segment == k) else {
                return Ok((None, FeedbackAction::reuse()));
            };
            let action = match &step.action {
                ScriptAction::Reuse => FeedbackAction::reuse(),
                ScriptAction::Text(t) => FeedbackAction::text(t.clone()),
                ScriptAction::Speech(id) => {
                    let audio = fixture_audio(id).ok_or_else(|| CliError::Script {
                        line: step.line,
                        message: format!("no audio fixture named `{id}`"),
                    })?;
                    FeedbackAction::speech(audio)
                }
            };
            let action = match step.yaw {
                Some(deg) => action.with_recenter(YawAngle::new(deg).map_err(|e| CliError::Script {
                    line: step.line,
                    message: e.to_string(),
                })?),
                None => action,
            };
            Ok((Some(step.line), action))
        })
        .collect()
}

pub fn run_chain(options: &ChainOptions, steps: &[ScriptStep], backends: &BackendSuite) -> Result<ChainOutcome> {
    let params = ProjectionParams::with_width(options.width);
    params.validate().map_err(CliError::usage)?;
    let config = SessionConfig {
        target_segments: options.segments,
        segment_duration_s: options.duration_s,
        fps: options.fps,
        seed: options.seed,
        params,
    };
    config.validate().map_err(config_error)?;
    let actions = actions(steps, options.segments)?;
    let prompt = TextPrompt::new(&options.prompt).map_err(|e| CliError::Usage(format!("--prompt: {e}")))?;
    let mut session = Session::start(prompt, options.image.as_ref(), config, backends).map_err(config_error)?;

    for k in 0..options.segments {
        if k > 0 {
            let (line, action) = &actions[k - 1];
            session.apply_feedback(action, backends).map_err(|e| match (line, e) {
                (Some(line), SessionError::Agent(a)) => CliError::Script {
                    line: *line,
                    message: a.to_string(),
                },
                (_, e) => CliError::Internal(e.to_string()),
            })?;
        }
        let status = session
            .run_generation(k, backends)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        if status != SegmentStatus::Ready {
            let error = session.segments()[k].error.clone().unwrap_or_default();
            return Err(CliError::Internal(format!("segment {k} failed: {error}")));
        }
    }
    let clip = session.finalize().map_err(|e| CliError::Internal(e.to_string()))?;
    session
        .verify_chaining()
        .map_err(|e| CliError::Internal(e.to_string()))?;

    let segments = session
        .segments()
        .iter()
        .map(|s| {
            let clip = s.clip.as_ref().expect("ready segments carry clips");
            SegmentReport {
                index: s.index,
                origin: s.origin,
                text_prompt: s.text_prompt.as_str().to_owned(),
                refined_prompt: s.refined.rendered().to_owned(),
                yaw_at_generation: s.yaw_at_generation,
                heading: s.heading,
                frame_count: clip.len(),
                clip_sha256: clip.content_hash(),
            }
        })
        .collect();
    let (width, height) = clip.dimensions();
    let report = ChainReport {
        frame_count: clip.len(),
        fps: clip.fps(),
        duration_s: clip.duration_seconds(),
        width,
        height,
        final_yaw: session.current_yaw(),
        sha256: clip.content_hash(),
        segments,
    };
    Ok(ChainOutcome {
        session,
        clip,
        report,
    })
}
