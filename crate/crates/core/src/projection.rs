//! Flat frame to equirect panorama.
//!
//! The canvas is `out_width x out_width / 2`. The source is stretched over
//! the whole canvas and blurred to form the background; a sharp copy scaled
//! to a fixed fraction of the canvas height sits centered on top. Finally
//! the left and right edges are cross-faded so the wrap is seamless.

use serde::{Deserialize, Serialize};

use crate::blur::blur_background;
use crate::error::{PanoError, Result};
use crate::frame::{EquirectFrame, Frame, CHANNELS};
use crate::resample::{resample_into, resize_bilinear, Region};
use crate::seam::edge_blend_in_place;

pub const DEFAULT_OUT_WIDTH: u32 = 2048;

/// Upper end of the background blur strength scale, as a fraction of the
/// canvas height.
pub const MAX_BLUR_SIGMA_FRAC: f64 = 0.1;

/// Default background blur: half of [`MAX_BLUR_SIGMA_FRAC`].
pub const DEFAULT_BLUR_SIGMA_FRAC: f64 = 0.5 * MAX_BLUR_SIGMA_FRAC;

/// Foreground height as a fraction of the canvas height.
pub const FG_HEIGHT_FRAC: f64 = 0.75;

pub const DEFAULT_BLEND_BAND_FRAC: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionParams {
    /// Canvas width in pixels; must be even. Height is half of it.
    pub out_width: u32,
    /// Background blur sigma as a fraction of the canvas height.
    pub blur_sigma_frac: f64,
    /// Foreground height as a fraction of the canvas height.
    pub fg_height_frac: f64,
    /// Seam blend band per side as a fraction of the canvas width.
    pub blend_band_frac: f64,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        Self {
            out_width: DEFAULT_OUT_WIDTH,
            blur_sigma_frac: DEFAULT_BLUR_SIGMA_FRAC,
            fg_height_frac: FG_HEIGHT_FRAC,
            blend_band_frac: DEFAULT_BLEND_BAND_FRAC,
        }
    }
}

impl ProjectionParams {
    pub fn with_width(out_width: u32) -> Self {
        Self {
            out_width,
            ..Self::default()
        }
    }

    pub fn out_height(&self) -> u32 {
        self.out_width / 2
    }

    pub fn blur_sigma(&self) -> f64 {
        self.blur_sigma_frac * f64::from(self.out_height())
    }

    pub fn validate(&self) -> Result<()> {
        if self.out_width < 4 || self.out_width % 2 != 0 {
            return Err(PanoError::InvalidParameter(format!(
                "out_width must be an even number >= 4, got {}",
                self.out_width
            )));
        }
        if !(0.0..=MAX_BLUR_SIGMA_FRAC).contains(&self.blur_sigma_frac) {
            return Err(PanoError::InvalidParameter(format!(
                "blur_sigma_frac must lie in [0, {MAX_BLUR_SIGMA_FRAC}], got {}",
                self.blur_sigma_frac
            )));
        }
        if !(self.fg_height_frac > 0.0 && self.fg_height_frac <= 1.0) {
            return Err(PanoError::InvalidParameter(format!(
                "fg_height_frac must lie in (0, 1], got {}",
                self.fg_height_frac
            )));
        }
        check_band_frac(self.blend_band_frac)
    }
}

pub fn check_band_frac(band_frac: f64) -> Result<()> {
    if !(0.0..0.5).contains(&band_frac) {
        return Err(PanoError::InvalidParameter(format!(
            "blend band fraction must lie in [0, 0.5), got {band_frac}"
        )));
    }
    Ok(())
}

/// Placement of the sharp foreground on the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ForegroundRect {
    /// Canvas column of the left edge; negative when the foreground is wider
    /// than the canvas and gets cropped on both sides.
    pub x: i64,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

/// Aspect-preserving foreground size and centered placement for a
/// `src_width x src_height` source.
pub fn foreground_rect(src_width: u32, src_height: u32, params: &ProjectionParams) -> ForegroundRect {
    let out_w = params.out_width;
    let out_h = params.out_height();
    let height = ((params.fg_height_frac * f64::from(out_h)).round() as u32).clamp(1, out_h);
    let width = ((f64::from(src_width) * f64::from(height) / f64::from(src_height)).round() as u32).max(1);
    ForegroundRect {
        x: (i64::from(out_w) - i64::from(width)) / 2,
        y: (out_h - height) / 2,
        width,
        height,
    }
}

/// The blurred, stretched background layer alone.
pub fn render_background(src: &Frame, params: &ProjectionParams) -> Result<Frame> {
    params.validate()?;
    let stretched = resize_bilinear(src, params.out_width, params.out_height())?;
    blur_background(&stretched, params.blur_sigma())
}

/// Converts a flat frame into an equirect panorama.
pub fn to_equirect(src: &Frame, params: &ProjectionParams) -> Result<EquirectFrame> {
    let mut canvas = render_background(src, params)?;
    let fg = foreground_rect(src.width(), src.height(), params);
    composite_foreground(src, fg, &mut canvas);
    let mut pano = EquirectFrame::new(canvas)?;
    edge_blend_in_place(&mut pano, params.blend_band_frac)?;
    Ok(pano)
}

fn composite_foreground(src: &Frame, fg: ForegroundRect, canvas: &mut Frame) {
    // Crop to the visible columns when the foreground overhangs the canvas.
    let visible_x0 = fg.x.max(0) as u32;
    let crop_left = (i64::from(visible_x0) - fg.x) as u32;
    let visible_w = fg.width.saturating_sub(crop_left).min(canvas.width() - visible_x0);
    let region = Region {
        full_width: fg.width,
        full_height: fg.height,
        x: crop_left,
        y: 0,
        width: visible_w,
        height: fg.height,
    };
    let stride = canvas.stride();
    let start = fg.y as usize * stride + visible_x0 as usize * CHANNELS;
    resample_into(src, region, &mut canvas.as_bytes_mut()[start..], stride);
}
