//! Bilinear resampling with clamped borders.

use crate::error::{PanoError, Result};
use crate::frame::{Frame, CHANNELS};

/// Resizes `src` to `width x height` (aspect ratio not preserved).
pub fn resize_bilinear(src: &Frame, width: u32, height: u32) -> Result<Frame> {
    if width == 0 || height == 0 {
        return Err(PanoError::InvalidParameter(format!(
            "resize target must be non-empty, got {width}x{height}"
        )));
    }
    let mut out = vec![0u8; width as usize * height as usize * CHANNELS];
    let target = Region {
        full_width: width,
        full_height: height,
        x: 0,
        y: 0,
        width,
        height,
    };
    resample_into(src, target, &mut out, width as usize * CHANNELS);
    Frame::new(width, height, out)
}

/// A window `(x, y, width, height)` of a virtual `full_width x full_height`
/// resampled image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Region {
    pub full_width: u32,
    pub full_height: u32,
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

/// Writes the bilinear resampling of `src` onto `region` into `dst`, whose
/// rows are `dst_stride` bytes apart; `dst[0]` is the region's top-left pixel.
pub(crate) fn resample_into(src: &Frame, region: Region, dst: &mut [u8], dst_stride: usize) {
    let (sw, sh) = (src.width() as usize, src.height() as usize);
    let sx = sw as f64 / f64::from(region.full_width);
    let sy = sh as f64 / f64::from(region.full_height);

    let taps_x: Vec<(usize, usize, f32)> = (region.x..region.x + region.width)
        .map(|x| axis_tap(x, sx, sw))
        .map(|(i0, i1, t)| (i0 * CHANNELS, i1 * CHANNELS, t))
        .collect();

    let src_stride = sw * CHANNELS;
    let data = src.as_bytes();
    let mut row_buf = vec![0f32; src_stride];
    for (row_idx, y) in (region.y..region.y + region.height).enumerate() {
        let (y0, y1, ty) = axis_tap(y, sy, sh);
        let r0 = &data[y0 * src_stride..(y0 + 1) * src_stride];
        let r1 = &data[y1 * src_stride..(y1 + 1) * src_stride];
        for ((b, &a0), &a1) in row_buf.iter_mut().zip(r0).zip(r1) {
            let a0 = f32::from(a0);
            *b = a0 + (f32::from(a1) - a0) * ty;
        }
        let out_row = &mut dst[row_idx * dst_stride..row_idx * dst_stride + taps_x.len() * CHANNELS];
        lerp_row(&row_buf, &taps_x, out_row);
    }
}

/// Horizontal lerp of a float row into 8-bit pixels. Inputs lie in
/// `[0, 255]`, so the saturating cast needs no clamp.
#[inline]
pub(crate) fn lerp_row(row: &[f32], taps: &[(usize, usize, f32)], out: &mut [u8]) {
    for (px, &(i0, i1, t)) in out.chunks_exact_mut(CHANNELS).zip(taps) {
        let a = &row[i0..i0 + CHANNELS];
        let b = &row[i1..i1 + CHANNELS];
        px[0] = (a[0] + (b[0] - a[0]) * t + 0.5) as u8;
        px[1] = (a[1] + (b[1] - a[1]) * t + 0.5) as u8;
        px[2] = (a[2] + (b[2] - a[2]) * t + 0.5) as u8;
    }
}

/// Source taps for output index `i` under pixel-center alignment.
fn axis_tap(i: u32, scale: f64, len: usize) -> (usize, usize, f32) {
    let u = ((f64::from(i) + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
    let i0 = u.floor() as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, (u - i0 as f64) as f32)
}
