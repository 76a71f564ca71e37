//! The frame sequence commands: convert, recenter, blend, concat, seam.

use std::io::Write;

use pano_core::projection::check_band_frac;
use pano_core::{concat, edge_blend, recenter, seam_continuity, to_equirect, Clip, EquirectFrame, ProjectionParams, YawAngle};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{BlendArgs, ConcatArgs, ConvertArgs, RecenterArgs, SeamArgs};
use crate::error::{CliError, Result};
use crate::sequence::{frame_name, read_sequence, write_sequence, SequenceManifest};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSeam {
    pub frame: String,
    pub seam: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeamReport {
    pub frames: Vec<FrameSeam>,
    pub mean: f64,
    pub max: f64,
}

impl SeamReport {
    pub fn new(names: &[String], frames: &[EquirectFrame]) -> Self {
        let frames: Vec<FrameSeam> = names
            .iter()
            .zip(frames)
            .map(|(name, f)| FrameSeam {
                frame: name.clone(),
                seam: seam_continuity(f),
            })
            .collect();
        let mean = frames.iter().map(|f| f.seam).sum::<f64>() / frames.len().max(1) as f64;
        let max = frames.iter().map(|f| f.seam).fold(0.0, f64::max);
        Self { frames, mean, max }
    }

    fn print(&self, out: &mut dyn Write, json: bool) -> Result<()> {
        let text = if json {
            serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))? + "\n"
        } else {
            let mut s = String::new();
            for f in &self.frames {
                s += &format!("{} seam {:.4}\n", f.frame, f.seam);
            }
            s + &format!("mean seam {:.4}\nmax seam {:.4}\n", self.mean, self.max)
        };
        emit(out, &text)
    }
}

pub fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Internal(format!("writing output: {e}")))
}

fn clip_of(frames: Vec<EquirectFrame>, fps: u32) -> Result<Clip> {
    Clip::new(frames.into_iter().map(EquirectFrame::into_frame).collect(), fps)
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn output_names(n: usize) -> Vec<String> {
    (0..n).map(frame_name).collect()
}

pub fn convert_params(args: &ConvertArgs) -> Result<ProjectionParams> {
    let params = ProjectionParams {
        out_width: args.width,
        blur_sigma_frac: args.blur_frac,
        fg_height_frac: args.fg_frac,
        blend_band_frac: args.band_frac,
    };
    params.validate().map_err(CliError::usage)?;
    Ok(params)
}

pub fn convert(args: &ConvertArgs, out: &mut dyn Write) -> Result<()> {
    let params = convert_params(args)?;
    let input = read_sequence(&args.input)?;
    let frames: Vec<EquirectFrame> = input
        .clip
        .frames()
        .par_iter()
        .map(|f| to_equirect(f, &params))
        .collect::<pano_core::Result<_>>()
        .map_err(|e| CliError::Data(e.to_string()))?;
    let report = SeamReport::new(&output_names(frames.len()), &frames);
    let clip = clip_of(frames, input.clip.fps())?;
    write_sequence(&args.out_dir, &clip, &SequenceManifest::describe(&clip, YawAngle::ZERO, Some(params)))?;
    report.print(out, args.json)
}

pub fn recenter_cmd(args: &RecenterArgs, out: &mut dyn Write) -> Result<()> {
    let yaw = YawAngle::new(args.yaw).map_err(CliError::usage)?;
    let input = read_sequence(&args.input)?;
    let frames: Vec<EquirectFrame> = input
        .equirect_frames()?
        .par_iter()
        .map(|f| recenter(f, yaw))
        .collect();
    let total = input.yaw + yaw;
    let clip = clip_of(frames, input.clip.fps())?;
    write_sequence(&args.out_dir, &clip, &SequenceManifest::describe(&clip, total, None))?;
    emit(
        out,
        &format!("recentered {} frames by {}; cumulative yaw {}\n", clip.len(), yaw.degrees(), total.degrees()),
    )
}

pub fn blend(args: &BlendArgs, out: &mut dyn Write) -> Result<()> {
    check_band_frac(args.band_frac).map_err(CliError::usage)?;
    let input = read_sequence(&args.input)?;
    let frames: Vec<EquirectFrame> = input
        .equirect_frames()?
        .par_iter()
        .map(|f| edge_blend(f, args.band_frac).expect("band checked above"))
        .collect();
    let report = SeamReport::new(&output_names(frames.len()), &frames);
    let clip = clip_of(frames, input.clip.fps())?;
    write_sequence(&args.out_dir, &clip, &SequenceManifest::describe(&clip, input.yaw, None))?;
    report.print(out, false)
}

pub fn concat_cmd(args: &ConcatArgs, out: &mut dyn Write) -> Result<()> {
    let inputs = args
        .inputs
        .iter()
        .map(|p| read_sequence(p))
        .collect::<Result<Vec<_>>>()?;
    let clips: Vec<Clip> = inputs.iter().map(|s| s.clip.clone()).collect();
    let joined = concat(&clips).map_err(|e| CliError::Data(e.to_string()))?;
    let yaw = inputs.last().map_or(YawAngle::ZERO, |s| s.yaw);
    write_sequence(&args.out, &joined, &SequenceManifest::describe(&joined, yaw, None))?;
    emit(
        out,
        &format!(
            "{} frames, {:.3} s at {} fps\n",
            joined.len(),
            joined.duration_seconds(),
            joined.fps()
        ),
    )
}

pub fn seam(args: &SeamArgs, out: &mut dyn Write) -> Result<()> {
    let input = read_sequence(&args.input)?;
    let frames = input.equirect_frames()?;
    SeamReport::new(&input.names, &frames).print(out, args.json)
}
