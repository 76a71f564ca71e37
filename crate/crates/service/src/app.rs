//! Service state: live sessions, their digests and job history.
//!
//! Every mutation of a session happens under that session's mutex and is
//! followed by a manifest write before the lock is released, so the manifest
//! on disk always reflects a state the session actually passed through.
//! Backend calls run without the lock held.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use pano_agents::codec::{decode_png, png_dimensions};
use pano_agents::{AudioInput, BackendSuite, GenerationRequest, TextPrompt};
use pano_core::{normalize_yaw, ProjectionParams, YawAngle};
use pano_session::{
    BlendedClip, PromptInput, ResolvedPrompt, SegmentStatus, Session, SessionConfig, SessionState,
};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use tracing::{info, warn};

use crate::error::ApiError;
use crate::manifest::{SegmentDigests, SessionManifest};
use crate::store::{is_valid_id, SessionStore, StoreError};

/// Largest accepted initial image, measured as decoded RGB bytes.
pub const MAX_IMAGE_BYTES: u64 = 32 * 1024 * 1024;
pub const DEFAULT_MAX_JOBS: usize = 2;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_concurrent_jobs: usize,
    /// Used when a create request does not name a seed.
    pub default_seed: u64,
    /// Used when a create request does not carry projection params.
    pub default_params: ProjectionParams,
    /// Directory served at `/`; a placeholder page when absent.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_concurrent_jobs: DEFAULT_MAX_JOBS,
            default_seed: 0,
            default_params: ProjectionParams::default(),
            ui_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobPhase {
    Queued,
    Running,
    Done,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobStatus {
    pub job_id: usize,
    pub session_id: String,
    pub segment_index: usize,
    pub phase: JobPhase,
    pub error_message: Option<String>,
    /// Frames generated and stored so far.
    pub progress_frames: usize,
    pub expected_frames: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionBody {
    pub text: String,
    /// Base64-encoded PNG.
    #[serde(default)]
    pub image: Option<String>,
    #[serde(default)]
    pub params: Option<ProjectionParams>,
    #[serde(default)]
    pub target_segments: Option<usize>,
    #[serde(default)]
    pub segment_duration_s: Option<f64>,
    #[serde(default)]
    pub fps: Option<u32>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Exactly one of `reuse`, `text` or `audio_wav_base64`, plus an optional
/// recenter.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackBody {
    #[serde(default)]
    pub reuse: Option<bool>,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub audio_wav_base64: Option<String>,
    #[serde(default)]
    pub yaw_degrees: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReply {
    pub segment_index: usize,
    pub text_prompt: String,
    pub refined_prompt: String,
    pub yaw_at_generation: YawAngle,
    pub current_yaw: YawAngle,
}

struct Live {
    session: Session,
    digests: Vec<SegmentDigests>,
}

struct Entry {
    live: Mutex<Live>,
    jobs: Mutex<Vec<JobStatus>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // A panic while holding the lock leaves the data as consistent as the
    // last completed statement; keep serving rather than cascading.
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

/// A claimed generation, to be run by [`AppState::execute_job`].
#[derive(Debug)]
pub struct JobTicket {
    pub status: JobStatus,
    request: GenerationRequest,
}

pub struct AppState {
    store: SessionStore,
    backends: BackendSuite,
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Entry>>>,
    job_slots: Arc<Semaphore>,
}

impl AppState {
    /// Loads every session under the store root. Sessions that fail to load
    /// are skipped with a warning; interrupted generations are persisted as
    /// failed right away.
    pub fn open(store: SessionStore, backends: BackendSuite, config: ServiceConfig) -> Result<Arc<Self>, StoreError> {
        let mut sessions = HashMap::new();
        for id in store.ids()? {
            match store.load(&id) {
                Ok(loaded) => {
                    if !loaded.interrupted.is_empty() {
                        let manifest = SessionManifest::describe(&loaded.session, &loaded.digests);
                        store.persist(&manifest, &loaded.session)?;
                    }
                    let entry = Entry {
                        live: Mutex::new(Live {
                            session: loaded.session,
                            digests: loaded.digests,
                        }),
                        jobs: Mutex::new(Vec::new()),
                    };
                    sessions.insert(id, Arc::new(entry));
                }
                Err(e) => warn!(session = %id, error = %e, "skipping unloadable session"),
            }
        }
        info!(count = sessions.len(), root = %store.root().display(), "sessions loaded");
        Ok(Arc::new(Self {
            store,
            backends,
            job_slots: Arc::new(Semaphore::new(config.max_concurrent_jobs.max(1))),
            config,
            sessions: RwLock::new(sessions),
        }))
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub(crate) fn job_slots(&self) -> Arc<Semaphore> {
        self.job_slots.clone()
    }

    fn entry(&self, id: &str) -> Result<Arc<Entry>, ApiError> {
        if !is_valid_id(id) {
            return Err(ApiError::not_found(format!("no session {id}")));
        }
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no session {id}")))
    }

    fn persist(&self, live: &Live) -> Result<(), ApiError> {
        let manifest = SessionManifest::describe(&live.session, &live.digests);
        self.store.persist(&manifest, &live.session)?;
        Ok(())
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    pub fn create_session(&self, body: CreateSessionBody) -> Result<SessionManifest, ApiError> {
        let text = TextPrompt::new(&body.text)?;
        let image = match &body.image {
            Some(b64) => {
                let bytes = BASE64
                    .decode(b64)
                    .map_err(|e| ApiError::unprocessable(format!("image is not base64: {e}")))?;
                let (w, h) = png_dimensions(&bytes)?;
                let decoded = u64::from(w) * u64::from(h) * 3;
                if decoded > MAX_IMAGE_BYTES {
                    return Err(ApiError::unprocessable(format!(
                        "image decodes to {decoded} bytes, limit is {MAX_IMAGE_BYTES}"
                    )));
                }
                Some(decode_png(&bytes)?)
            }
            None => None,
        };
        let defaults = SessionConfig::default();
        let config = SessionConfig {
            target_segments: body.target_segments.unwrap_or(defaults.target_segments),
            segment_duration_s: body.segment_duration_s.unwrap_or(defaults.segment_duration_s),
            fps: body.fps.unwrap_or(defaults.fps),
            seed: body.seed.unwrap_or(self.config.default_seed),
            params: body.params.unwrap_or(self.config.default_params),
        };
        let session = Session::start(text, image.as_ref(), config, &self.backends)?;
        let live = Live {
            digests: session.segments().iter().map(SegmentDigests::of).collect(),
            session,
        };
        self.persist(&live)?;
        let manifest = SessionManifest::describe(&live.session, &live.digests);
        let id = live.session.id().to_owned();
        let entry = Arc::new(Entry {
            live: Mutex::new(live),
            jobs: Mutex::new(Vec::new()),
        });
        self.sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(id, entry);
        Ok(manifest)
    }

    pub fn manifest(&self, id: &str) -> Result<SessionManifest, ApiError> {
        let entry = self.entry(id)?;
        let live = lock(&entry.live);
        Ok(SessionManifest::describe(&live.session, &live.digests))
    }

    pub fn jobs(&self, id: &str) -> Result<Vec<JobStatus>, ApiError> {
        let entry = self.entry(id)?;
        let jobs = lock(&entry.jobs).clone();
        Ok(jobs)
    }

    /// Marks the segment generating and queues a job for it. A failed
    /// segment is moved back to pending first, so this doubles as retry.
    pub fn claim_generation(&self, id: &str, index: usize) -> Result<JobTicket, ApiError> {
        let entry = self.entry(id)?;
        let mut live = lock(&entry.live);
        let session = &mut live.session;
        let failed = session.state() == SessionState::Active
            && session.segment(index).is_ok_and(|s| s.status == SegmentStatus::Failed);
        if failed {
            session.retry_segment(index)?;
        }
        // A failed segment is always the newest and nothing else can be
        // generating, so after the retry above this only fails for reasons
        // that apply equally to the original state.
        let request = session.begin_generation(index)?;
        if let Err(e) = self.persist(&live) {
            // Roll back to failed so the in-memory state matches disk.
            let _ = live.session.fail_generation(index, &e.message);
            return Err(e);
        }
        let mut jobs = lock(&entry.jobs);
        let status = JobStatus {
            job_id: jobs.len(),
            session_id: id.to_owned(),
            segment_index: index,
            phase: JobPhase::Queued,
            error_message: None,
            progress_frames: 0,
            expected_frames: request.expected_frames(),
        };
        jobs.push(status.clone());
        Ok(JobTicket { status, request })
    }

    fn update_job(&self, entry: &Entry, job_id: usize, f: impl FnOnce(&mut JobStatus)) {
        if let Some(job) = lock(&entry.jobs).get_mut(job_id) {
            f(job);
        }
    }

    pub(crate) fn mark_running(&self, ticket: &JobTicket) {
        if let Ok(entry) = self.entry(&ticket.status.session_id) {
            self.update_job(&entry, ticket.status.job_id, |j| j.phase = JobPhase::Running);
        }
    }

    /// Runs a claimed generation to completion: backend call, blending,
    /// frame writes, then the ready transition. Blocking.
    pub fn execute_job(&self, ticket: JobTicket) -> JobStatus {
        let JobTicket { status, request } = ticket;
        let id = status.session_id.clone();
        let index = status.segment_index;
        let Ok(entry) = self.entry(&id) else {
            return status;
        };
        let band = lock(&entry.live).session.config().params.blend_band_frac;
        let outcome = self
            .backends
            .generate(&request)
            .and_then(|raw| BlendedClip::new(index, &request, raw, band))
            .map_err(|e| e.to_string())
            .and_then(|clip| {
                self.store
                    .write_clip(&id, index, clip.clip(), |n| {
                        self.update_job(&entry, status.job_id, |j| j.progress_frames = n);
                    })
                    .map_err(|e| e.to_string())?;
                let digest = clip.clip().content_hash();
                Ok((clip, digest))
            });

        let mut live = lock(&entry.live);
        let result = match outcome {
            Ok((clip, digest)) => live.session.complete_generation(clip).map(|()| {
                live.digests[index].clip = Some(digest);
            }),
            Err(message) => live.session.fail_generation(index, message),
        };
        let result = result
            .map_err(ApiError::from)
            .and_then(|()| self.persist(&live));
        let segment = &live.session.segments()[index];
        let (phase, message) = match (&result, segment.status) {
            (Ok(()), SegmentStatus::Ready) => (JobPhase::Done, None),
            (Ok(()), _) => (JobPhase::Error, segment.error.clone()),
            (Err(e), _) => (JobPhase::Error, Some(e.message.clone())),
        };
        drop(live);
        let mut final_status = status;
        self.update_job(&entry, final_status.job_id, |j| {
            j.phase = phase;
            j.error_message = message.clone();
        });
        final_status.phase = phase;
        final_status.error_message = message;
        if let Some(j) = lock(&entry.jobs).get(final_status.job_id) {
            final_status.progress_frames = j.progress_frames;
        }
        final_status
    }

    pub fn feedback(&self, id: &str, body: FeedbackBody) -> Result<FeedbackReply, ApiError> {
        let entry = self.entry(id)?;
        let input = match (body.reuse, body.text, body.audio_wav_base64) {
            (Some(true), None, None) => PromptInput::Reuse,
            (None, Some(text), None) => PromptInput::Text(text),
            (None, None, Some(b64)) => {
                let wav = BASE64
                    .decode(b64)
                    .map_err(|e| ApiError::unprocessable(format!("audio is not base64: {e}")))?;
                PromptInput::Speech(AudioInput::from_wav(&wav)?)
            }
            _ => {
                return Err(ApiError::bad_request(
                    "exactly one of reuse: true, text or audio_wav_base64 is required",
                ))
            }
        };
        let recenter = body
            .yaw_degrees
            .map(normalize_yaw)
            .transpose()
            .map_err(ApiError::from)?;

        // Fail fast on ordering before spending backend calls.
        lock(&entry.live).session.check_can_extend()?;
        let fresh = ResolvedPrompt::fresh(&input, &self.backends)?;

        let mut live = lock(&entry.live);
        let resolved = match fresh {
            Some(r) => r,
            None => live.session.resolve_prompt(&PromptInput::Reuse, &self.backends)?,
        };
        let index = live.session.extend(resolved, recenter)?;
        let digests = SegmentDigests::of(&live.session.segments()[index]);
        live.digests.push(digests);
        if let Err(e) = self.persist(&live) {
            warn!(session = id, error = %e.message, "feedback not persisted");
            return Err(e);
        }
        let segment = &live.session.segments()[index];
        Ok(FeedbackReply {
            segment_index: index,
            text_prompt: segment.text_prompt.as_str().to_owned(),
            refined_prompt: segment.refined.rendered().to_owned(),
            yaw_at_generation: segment.yaw_at_generation,
            current_yaw: live.session.current_yaw(),
        })
    }

    pub fn finalize(&self, id: &str) -> Result<SessionManifest, ApiError> {
        let entry = self.entry(id)?;
        let mut live = lock(&entry.live);
        let was_complete = live.session.state() == SessionState::Complete;
        live.session.finalize()?;
        if !was_complete {
            self.persist(&live)?;
        }
        Ok(SessionManifest::describe(&live.session, &live.digests))
    }

    /// Path of a stored frame of a ready segment.
    pub fn frame_path(&self, id: &str, index: usize, frame: usize) -> Result<PathBuf, ApiError> {
        let entry = self.entry(id)?;
        let live = lock(&entry.live);
        let segment = live.session.segment(index)?;
        let count = segment.clip.as_ref().map_or(0, |c| c.len());
        if frame >= count {
            return Err(ApiError::not_found(format!(
                "segment {index} has {count} stored frames"
            )));
        }
        Ok(self.store.frame_path(id, index, frame))
    }

    pub fn image_prompt_path(&self, id: &str, index: usize) -> Result<PathBuf, ApiError> {
        let entry = self.entry(id)?;
        let live = lock(&entry.live);
        live.session.segment(index)?;
        Ok(self.store.image_prompt_path(id, index))
    }

    /// Maps a frame of the assembled clip onto its segment's stored frame.
    pub fn final_frame_path(&self, id: &str, frame: usize) -> Result<PathBuf, ApiError> {
        let entry = self.entry(id)?;
        let live = lock(&entry.live);
        if live.session.state() != SessionState::Complete {
            return Err(ApiError::conflict("session is not finalized"));
        }
        let per = live.session.config().frames_per_segment();
        let index = frame / per;
        if index >= live.session.segments().len() {
            return Err(ApiError::not_found(format!("final clip has no frame {frame}")));
        }
        Ok(self.store.frame_path(id, index, frame % per))
    }
}
