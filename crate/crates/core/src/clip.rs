//! Frame sequences.

use std::ops::Range;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{PanoError, Result};
use crate::frame::Frame;

pub const DEFAULT_FPS: u32 = 24;

/// A non-empty run of equally sized frames played at a fixed rate.
///
/// Frames are reference counted so concatenation and slicing never copy
/// pixel data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clip {
    frames: Vec<Arc<Frame>>,
    fps: u32,
}

impl Clip {
    pub fn new(frames: Vec<Frame>, fps: u32) -> Result<Self> {
        Self::from_shared(frames.into_iter().map(Arc::new).collect(), fps)
    }

    pub fn from_shared(frames: Vec<Arc<Frame>>, fps: u32) -> Result<Self> {
        if fps == 0 {
            return Err(PanoError::InvalidParameter("fps must be positive".into()));
        }
        let first = frames.first().ok_or(PanoError::EmptyClip)?;
        let dims = first.dimensions();
        if let Some((i, f)) = frames.iter().enumerate().find(|(_, f)| f.dimensions() != dims) {
            return Err(PanoError::InvalidInput(format!(
                "frame {i} is {}x{}, clip frames are {}x{}",
                f.width(),
                f.height(),
                dims.0,
                dims.1
            )));
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[Arc<Frame>] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> Option<&Frame> {
        self.frames.get(index).map(|f| f.as_ref())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn dimensions(&self) -> (u32, u32) {
        self.frames[0].dimensions()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.frames.len() as f64 / f64::from(self.fps)
    }

    /// A contiguous sub-clip sharing this clip's frames.
    pub fn slice(&self, range: Range<usize>) -> Result<Clip> {
        let frames = self
            .frames
            .get(range.clone())
            .ok_or_else(|| {
                PanoError::InvalidParameter(format!(
                    "range {range:?} out of bounds for {} frames",
                    self.frames.len()
                ))
            })?
            .to_vec();
        Clip::from_shared(frames, self.fps)
    }

    /// Applies `f` to every frame, keeping the frame rate.
    pub fn map_frames(&self, f: impl FnMut(&Frame) -> Frame) -> Result<Clip> {
        Clip::new(self.frames.iter().map(|fr| fr.as_ref()).map(f).collect(), self.fps)
    }

    /// Hex SHA-256 over fps, frame count and every frame's pixels.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.fps.to_le_bytes());
        hasher.update((self.frames.len() as u64).to_le_bytes());
        for frame in &self.frames {
            frame.digest_into(&mut hasher);
        }
        hex::encode(hasher.finalize())
    }
}

/// The final frame of a clip, used as the next segment's image prompt.
pub fn last_frame(clip: &Clip) -> &Frame {
    clip.frames.last().expect("clips are never empty")
}

/// Joins clips end to end. All clips must share dimensions and frame rate.
pub fn concat(clips: &[Clip]) -> Result<Clip> {
    let first = clips.first().ok_or(PanoError::EmptyClip)?;
    for (i, clip) in clips.iter().enumerate().skip(1) {
        if clip.fps != first.fps {
            return Err(PanoError::IncompatibleClips(format!(
                "clip {i} runs at {} fps, clip 0 at {} fps",
                clip.fps, first.fps
            )));
        }
        if clip.dimensions() != first.dimensions() {
            let (w, h) = clip.dimensions();
            let (w0, h0) = first.dimensions();
            return Err(PanoError::IncompatibleClips(format!(
                "clip {i} is {w}x{h}, clip 0 is {w0}x{h0}"
            )));
        }
    }
    let frames = clips.iter().flat_map(|c| c.frames.iter().cloned()).collect();
    Clip::from_shared(frames, first.fps)
}
