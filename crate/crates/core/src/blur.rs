//! Separable Gaussian blur on equirect topology.
//!
//! Rows wrap around (the panorama is a cylinder). Columns use half-sample
//! symmetric reflection at the poles, which keeps the blur operator
//! doubly stochastic so the frame mean is preserved.

use crate::error::{PanoError, Result};
use crate::frame::{Frame, CHANNELS};
use crate::resample::lerp_row;

/// Kernel support in standard deviations.
const KERNEL_SIGMAS: f64 = 3.0;

/// Below this sigma the background blur runs at full resolution.
pub const PYRAMID_MIN_SIGMA: f64 = 8.0;

/// Largest decimation factor used by [`blur_background`].
const MAX_DECIMATION: usize = 16;

/// Normalized Gaussian weights for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let radius = (KERNEL_SIGMAS * sigma).ceil().max(1.0) as i64;
    let denom = 2.0 * sigma * sigma;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / denom).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| (w / total) as f32).collect()
}

/// Blurs every channel with a Gaussian of standard deviation `sigma` pixels.
///
/// `sigma == 0` returns the input unchanged.
pub fn gaussian_blur(frame: &Frame, sigma: f64) -> Result<Frame> {
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(frame.clone());
    }
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let src: Vec<f32> = frame.as_bytes().iter().map(|&v| f32::from(v)).collect();
    let out = blur_f32(&src, w, h, &gaussian_kernel(sigma));
    Ok(Frame::new(frame.width(), frame.height(), quantize(&out)).expect("same dimensions"))
}

/// Gaussian blur tuned for large sigmas: the frame is box-averaged down by a
/// power of two, blurred exactly at low resolution with a sigma compensated
/// for the resampling filters, then bilinearly upsampled.
///
/// Small sigmas fall through to [`gaussian_blur`].
pub fn blur_background(frame: &Frame, sigma: f64) -> Result<Frame> {
    check_sigma(sigma)?;
    let factor = decimation_factor(sigma, frame.width(), frame.height());
    if factor < 2 {
        return gaussian_blur(frame, sigma);
    }
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let (lw, lh, low) = box_downsample(frame.as_bytes(), w, h, factor);

    // Box averaging over f samples adds variance (f^2 - 1) / 12 and the
    // bilinear upsample adds (f^2 - 1) / 6, both in full-resolution pixels.
    let f = factor as f64;
    let residual = sigma * sigma - (f * f - 1.0) / 4.0;
    let low_sigma = (residual / (f * f)).sqrt();
    let blurred = blur_f32(&low, lw, lh, &gaussian_kernel(low_sigma));

    let out = bilinear_upsample(&blurred, lw, lh, w, h, factor);
    Ok(Frame::new(frame.width(), frame.height(), out).expect("same dimensions"))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(PanoError::InvalidParameter(format!(
            "blur sigma must be a finite value >= 0, got {sigma}"
        )));
    }
    Ok(())
}

fn decimation_factor(sigma: f64, width: u32, height: u32) -> usize {
    if sigma < PYRAMID_MIN_SIGMA {
        return 1;
    }
    let mut factor = 1;
    while factor * 2 <= MAX_DECIMATION
        && sigma / (factor * 2) as f64 >= PYRAMID_MIN_SIGMA / 2.0
        && height as usize / (factor * 2) >= 2
        && width as usize / (factor * 2) >= 2
    {
        factor *= 2;
    }
    factor
}

/// Separable convolution of an interleaved RGB float buffer.
pub(crate) fn blur_f32(src: &[f32], w: usize, h: usize, kernel: &[f32]) -> Vec<f32> {
    let radius = kernel.len() / 2;
    let stride = w * CHANNELS;

    // Horizontal pass against a wrap-padded copy of each row.
    let mut tmp = vec![0f32; src.len()];
    let mut padded = vec![0f32; (w + 2 * radius) * CHANNELS];
    for (row, out_row) in src.chunks_exact(stride).zip(tmp.chunks_exact_mut(stride)) {
        for (p, px) in padded.chunks_exact_mut(CHANNELS).enumerate() {
            let x = (p as i64 - radius as i64).rem_euclid(w as i64) as usize;
            px.copy_from_slice(&row[x * CHANNELS..(x + 1) * CHANNELS]);
        }
        for (k, &weight) in kernel.iter().enumerate() {
            let window = &padded[k * CHANNELS..k * CHANNELS + stride];
            for (o, &v) in out_row.iter_mut().zip(window) {
                *o += weight * v;
            }
        }
    }

    // Vertical pass with symmetric reflection at top and bottom.
    let mut out = vec![0f32; src.len()];
    for (y, out_row) in out.chunks_exact_mut(stride).enumerate() {
        for (k, &weight) in kernel.iter().enumerate() {
            let sy = reflect(y as i64 + k as i64 - radius as i64, h);
            let in_row = &tmp[sy * stride..(sy + 1) * stride];
            for (o, &v) in out_row.iter_mut().zip(in_row) {
                *o += weight * v;
            }
        }
    }
    out
}

/// Half-sample symmetric index: `.. 1 0 | 0 1 .. n-1 | n-1 n-2 ..`.
pub(crate) fn reflect(i: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

pub(crate) fn quantize(values: &[f32]) -> Vec<u8> {
    values
        .iter()
        .map(|&v| (v.clamp(0.0, 255.0) + 0.5) as u8)
        .collect()
}

/// Averages `factor x factor` blocks; edge blocks average whatever pixels
/// they cover.
fn box_downsample(src: &[u8], w: usize, h: usize, factor: usize) -> (usize, usize, Vec<f32>) {
    let lw = w.div_ceil(factor);
    let lh = h.div_ceil(factor);
    let mut sums = vec![0f32; lw * lh * CHANNELS];
    for (y, row) in src.chunks_exact(w * CHANNELS).enumerate() {
        let ly = y / factor;
        let acc_row = &mut sums[ly * lw * CHANNELS..(ly + 1) * lw * CHANNELS];
        for (block, acc) in row
            .chunks(factor * CHANNELS)
            .zip(acc_row.chunks_exact_mut(CHANNELS))
        {
            let mut s = [0u32; CHANNELS];
            for px in block.chunks_exact(CHANNELS) {
                s[0] += u32::from(px[0]);
                s[1] += u32::from(px[1]);
                s[2] += u32::from(px[2]);
            }
            acc[0] += s[0] as f32;
            acc[1] += s[1] as f32;
            acc[2] += s[2] as f32;
        }
    }
    for (ly, acc_row) in sums.chunks_exact_mut(lw * CHANNELS).enumerate() {
        let rows = (h - ly * factor).min(factor);
        for (lx, px) in acc_row.chunks_exact_mut(CHANNELS).enumerate() {
            let cols = (w - lx * factor).min(factor);
            let inv = 1.0 / (rows * cols) as f32;
            px.iter_mut().for_each(|v| *v *= inv);
        }
    }
    (lw, lh, sums)
}

/// Upsamples block-centered low-res samples back to `w x h`; wraps
/// horizontally, clamps vertically.
fn bilinear_upsample(
    low: &[f32],
    lw: usize,
    lh: usize,
    w: usize,
    h: usize,
    factor: usize,
) -> Vec<u8> {
    let scale = 1.0 / factor as f64;
    let taps_x: Vec<(usize, usize, f32)> = (0..w)
        .map(|x| {
            let u = (x as f64 + 0.5) * scale - 0.5;
            let x0 = u.floor();
            let t = (u - x0) as f32;
            let i0 = (x0 as i64).rem_euclid(lw as i64) as usize;
            ((i0 * CHANNELS), ((i0 + 1) % lw) * CHANNELS, t)
        })
        .collect();
    let mut out = vec![0u8; w * h * CHANNELS];
    let mut row_buf = vec![0f32; lw * CHANNELS];
    let lstride = lw * CHANNELS;
    for (y, out_row) in out.chunks_exact_mut(w * CHANNELS).enumerate() {
        let v = ((y as f64 + 0.5) * scale - 0.5).clamp(0.0, (lh - 1) as f64);
        let y0 = v.floor() as usize;
        let y1 = (y0 + 1).min(lh - 1);
        let t = (v - y0 as f64) as f32;
        let r0 = &low[y0 * lstride..(y0 + 1) * lstride];
        let r1 = &low[y1 * lstride..(y1 + 1) * lstride];
        for ((b, &a0), &a1) in row_buf.iter_mut().zip(r0).zip(r1) {
            *b = a0 + (a1 - a0) * t;
        }
        lerp_row(&row_buf, &taps_x, out_row);
    }
    out
}
