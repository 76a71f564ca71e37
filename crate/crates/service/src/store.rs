//! On-disk session layout:
//!
//! ```text
//! <root>/<session id>/manifest.json
//! <root>/<session id>/seg_000/image_prompt.png
//! <root>/<session id>/seg_000/frame_00000.png ...
//! ```
//!
//! Frames are written before the manifest that declares them ready, and the
//! manifest is replaced atomically, so a crash at any point leaves the last
//! committed manifest describing files that exist.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use pano_agents::codec::{decode_png, encode_png};
use pano_core::{Clip, EquirectFrame, Frame, PanoError};
use pano_session::{Segment, SegmentStatus, Session, SessionError, SessionParts};
use thiserror::Error;
use tracing::warn;

use crate::manifest::{SegmentDigests, SessionManifest, MANIFEST_VERSION};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Message recorded on segments whose generation was cut off by a restart.
pub const INTERRUPTED: &str = "interrupted by service restart";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{0}")]
    Corrupt(String),

    #[error(transparent)]
    Session(#[from] SessionError),

    #[error(transparent)]
    Pano(#[from] PanoError),
}

type Result<T, E = StoreError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Session ids are 128-bit lowercase hex; anything else never reaches the
/// filesystem.
pub fn is_valid_id(id: &str) -> bool {
    id.len() == 32 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// A loaded session plus what the load had to repair.
#[derive(Debug)]
pub struct Loaded {
    pub session: Session,
    pub digests: Vec<SegmentDigests>,
    /// Segments that were generating when the process stopped; they are now
    /// failed and the manifest should be rewritten.
    pub interrupted: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    root: PathBuf,
}

impl SessionStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn session_dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    pub fn segment_dir(&self, id: &str, index: usize) -> PathBuf {
        self.session_dir(id).join(format!("seg_{index:03}"))
    }

    pub fn frame_path(&self, id: &str, index: usize, frame: usize) -> PathBuf {
        self.segment_dir(id, index).join(format!("frame_{frame:05}.png"))
    }

    pub fn image_prompt_path(&self, id: &str, index: usize) -> PathBuf {
        self.segment_dir(id, index).join("image_prompt.png")
    }

    fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let mut file = File::create(&tmp).map_err(io_err(&tmp))?;
        file.write_all(bytes).map_err(io_err(&tmp))?;
        file.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, path).map_err(io_err(path))
    }

    /// Writes the manifest and any image prompts not yet on disk.
    pub fn persist(&self, manifest: &SessionManifest, session: &Session) -> Result<()> {
        for segment in session.segments() {
            let path = self.image_prompt_path(&manifest.id, segment.index);
            if !path.exists() {
                let dir = self.segment_dir(&manifest.id, segment.index);
                fs::create_dir_all(&dir).map_err(io_err(&dir))?;
                Self::write_atomic(&path, &encode_png(&segment.image_prompt))?;
            }
        }
        let path = self.session_dir(&manifest.id).join(MANIFEST_FILE);
        let json = serde_json::to_vec_pretty(manifest).map_err(|source| StoreError::Json {
            path: path.clone(),
            source,
        })?;
        Self::write_atomic(&path, &json)
    }

    /// Writes every frame of a segment's clip, reporting each one done.
    pub fn write_clip(
        &self,
        id: &str,
        index: usize,
        clip: &Clip,
        mut on_frame: impl FnMut(usize),
    ) -> Result<()> {
        let dir = self.segment_dir(id, index);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for (i, frame) in clip.frames().iter().enumerate() {
            let path = self.frame_path(id, index, i);
            fs::write(&path, encode_png(frame)).map_err(io_err(&path))?;
            on_frame(i + 1);
        }
        Ok(())
    }

    pub fn read_png(&self, path: &Path) -> Result<Frame> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        Ok(decode_png(&bytes)?)
    }

    pub fn read_manifest(&self, id: &str) -> Result<SessionManifest> {
        let path = self.session_dir(id).join(MANIFEST_FILE);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        serde_json::from_slice(&bytes).map_err(|source| StoreError::Json { path, source })
    }

    /// Ids of every directory holding a manifest.
    pub fn ids(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(io_err(&self.root))? {
            let entry = entry.map_err(io_err(&self.root))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if is_valid_id(&name) && entry.path().join(MANIFEST_FILE).is_file() {
                ids.push(name);
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Rebuilds a session from disk, verifying every stored hash. Segments
    /// caught mid-generation come back failed.
    pub fn load(&self, id: &str) -> Result<Loaded> {
        let manifest = self.read_manifest(id)?;
        if manifest.version != MANIFEST_VERSION {
            return Err(StoreError::Corrupt(format!(
                "{id}: unsupported manifest version {}",
                manifest.version
            )));
        }
        if manifest.id != id {
            return Err(StoreError::Corrupt(format!("{id}: manifest names {}", manifest.id)));
        }
        let mut segments = Vec::with_capacity(manifest.segments.len());
        let mut digests = Vec::with_capacity(manifest.segments.len());
        let mut interrupted = Vec::new();
        for m in &manifest.segments {
            let image = self.read_png(&self.image_prompt_path(id, m.index))?;
            let image = EquirectFrame::new(image)?;
            if image.content_hash() != m.image_prompt_sha256 {
                return Err(StoreError::Corrupt(format!(
                    "{id}: segment {} image prompt hash mismatch",
                    m.index
                )));
            }
            let mut status = m.status;
            let mut error = m.error.clone();
            let clip = if status == SegmentStatus::Ready {
                let frames = (0..m.frame_count)
                    .map(|f| self.read_png(&self.frame_path(id, m.index, f)))
                    .collect::<Result<Vec<_>>>()?;
                let clip = Clip::new(frames, manifest.config.fps)?;
                if Some(clip.content_hash()) != m.clip_sha256 {
                    return Err(StoreError::Corrupt(format!(
                        "{id}: segment {} clip hash mismatch",
                        m.index
                    )));
                }
                Some(clip)
            } else {
                None
            };
            if status == SegmentStatus::Generating {
                warn!(session = id, index = m.index, "generation interrupted; marking failed");
                status = SegmentStatus::Failed;
                error = Some(INTERRUPTED.to_owned());
                interrupted.push(m.index);
            }
            digests.push(SegmentDigests {
                image_prompt: m.image_prompt_sha256.clone(),
                clip: clip.as_ref().and(m.clip_sha256.clone()),
            });
            segments.push(Segment {
                index: m.index,
                origin: m.origin,
                text_prompt: m.text_prompt.clone(),
                refined: m.refined_prompt.clone(),
                image_prompt: image,
                yaw_at_generation: m.yaw_at_generation,
                heading: m.heading,
                status,
                clip,
                error,
            });
        }
        let session = Session::from_parts(SessionParts {
            id: manifest.id,
            config: manifest.config,
            created_at: manifest.created_at,
            state: manifest.state,
            current_yaw: manifest.current_yaw,
            segments,
        })?;
        Ok(Loaded {
            session,
            digests,
            interrupted,
        })
    }
}
