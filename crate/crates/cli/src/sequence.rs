//! Frame sequences on disk: a directory of `frame_%05d.png` files plus a
//! `manifest.json`, or a single PNG.

use std::fs;
use std::path::{Path, PathBuf};

use pano_agents::codec::{decode_png, encode_png};
use pano_core::{Clip, EquirectFrame, Frame, ProjectionParams, YawAngle, DEFAULT_FPS};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn frame_name(index: usize) -> String {
    format!("frame_{index:05}.png")
}

fn is_frame_name(name: &str) -> bool {
    name.strip_prefix("frame_")
        .and_then(|rest| rest.strip_suffix(".png"))
        .is_some_and(|digits| digits.len() >= 5 && digits.bytes().all(|b| b.is_ascii_digit()))
}

/// Written next to every sequence. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceManifest {
    pub frame_count: usize,
    pub width: u32,
    pub height: u32,
    pub fps: u32,
    /// Total recentering applied since projection, normalized.
    pub yaw_degrees: YawAngle,
    pub sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ProjectionParams>,
}

impl SequenceManifest {
    pub fn describe(clip: &Clip, yaw: YawAngle, params: Option<ProjectionParams>) -> Self {
        let (width, height) = clip.dimensions();
        Self {
            frame_count: clip.len(),
            width,
            height,
            fps: clip.fps(),
            yaw_degrees: yaw,
            sha256: clip.content_hash(),
            params,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sequence {
    pub clip: Clip,
    /// Cumulative yaw from the input manifest, zero without one.
    pub yaw: YawAngle,
    /// File name of each frame, for reporting.
    pub names: Vec<String>,
}

impl Sequence {
    /// Frames checked to be 2:1.
    pub fn equirect_frames(&self) -> Result<Vec<EquirectFrame>> {
        self.clip
            .frames()
            .iter()
            .zip(&self.names)
            .map(|(f, name)| {
                EquirectFrame::new(Frame::clone(f)).map_err(|e| CliError::Data(format!("{name}: {e}")))
            })
            .collect()
    }
}

/// Reads a PNG file or a frame directory. In a directory, `frame_NNNNN.png`
/// files are used when present, otherwise every `.png` in name order.
pub fn read_sequence(path: &Path) -> Result<Sequence> {
    let meta = fs::metadata(path).map_err(|e| CliError::unreadable(path, e))?;
    if meta.is_file() {
        let frame = read_png(path)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let clip = Clip::new(vec![frame], DEFAULT_FPS).map_err(|e| CliError::unreadable(path, e))?;
        return Ok(Sequence {
            clip,
            yaw: YawAngle::ZERO,
            names: vec![name],
        });
    }

    let mut names: Vec<String> = fs::read_dir(path)
        .map_err(|e| CliError::unreadable(path, e))?
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.file_type().is_ok_and(|t| t.is_file()))
        .map(|entry| entry.file_name().to_string_lossy().into_owned())
        .filter(|name| name.to_ascii_lowercase().ends_with(".png"))
        .collect();
    if names.iter().any(|n| is_frame_name(n)) {
        names.retain(|n| is_frame_name(n));
    }
    names.sort();
    if names.is_empty() {
        return Err(CliError::unreadable(path, "no PNG frames found"));
    }

    let manifest = read_manifest(path)?;
    let frames: Vec<Frame> = names
        .par_iter()
        .map(|name| read_png(&path.join(name)))
        .collect::<Result<_>>()?;
    let fps = manifest.as_ref().map_or(DEFAULT_FPS, |m| m.fps);
    let clip = Clip::new(frames, fps).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(Sequence {
        clip,
        yaw: manifest.map_or(YawAngle::ZERO, |m| m.yaw_degrees),
        names,
    })
}

fn read_manifest(dir: &Path) -> Result<Option<SequenceManifest>> {
    let path = dir.join(MANIFEST_FILE);
    match fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| CliError::unreadable(&path, e)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::unreadable(&path, e)),
    }
}

pub fn read_png(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path).map_err(|e| CliError::unreadable(path, e))?;
    decode_png(&bytes).map_err(|e| CliError::unreadable(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::write(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::write(path, e))
}

/// Writes `clip` as `frame_%05d.png` files and a manifest. Frame files left
/// over from a longer earlier run are removed; nothing else is touched.
pub fn write_sequence(dir: &Path, clip: &Clip, manifest: &SequenceManifest) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    clip.frames()
        .par_iter()
        .enumerate()
        .try_for_each(|(i, frame)| {
            let path = dir.join(frame_name(i));
            fs::write(&path, encode_png(frame)).map_err(|e| CliError::write(&path, e))
        })?;
    let stale: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::write(dir, e))?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.file_name().to_string_lossy().into_owned())
        .filter(|name| is_frame_name(name))
        .filter(|name| name[6..name.len() - 4].parse::<usize>().is_ok_and(|i| i >= clip.len()))
        .map(|name| dir.join(name))
        .collect();
    for path in stale {
        fs::remove_file(&path).map_err(|e| CliError::write(&path, e))?;
    }
    write_json(&dir.join(MANIFEST_FILE), manifest)
}
