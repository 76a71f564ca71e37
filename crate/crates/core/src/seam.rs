//! Seam continuity between the left and right panorama edges.

use crate::error::Result;
use crate::frame::{EquirectFrame, CHANNELS};
use crate::projection::check_band_frac;

/// Columns per side touched by [`edge_blend`] for a given band fraction.
pub fn band_columns(width: u32, band_frac: f64) -> usize {
    (band_frac * f64::from(width)).round() as usize
}

/// Cross-fades the outer `round(band_frac * width)` columns on each side
/// with the mirrored columns of the opposite edge.
///
/// Column `i` from the left mixes with column `width - 1 - i` using weight
/// `w(i) = 0.5 * (B - i) / B`: the outermost pair meets at their average,
/// and the weight falls linearly to zero at the inner edge of the band.
pub fn edge_blend(frame: &EquirectFrame, band_frac: f64) -> Result<EquirectFrame> {
    let mut out = frame.clone();
    edge_blend_in_place(&mut out, band_frac)?;
    Ok(out)
}

pub fn edge_blend_in_place(frame: &mut EquirectFrame, band_frac: f64) -> Result<()> {
    check_band_frac(band_frac)?;
    let width = frame.width() as usize;
    let band = band_columns(frame.width(), band_frac).min(width / 2);
    if band == 0 {
        return Ok(());
    }
    // Integer weights: w(i) = (band - i) / (2 * band).
    let denom = 2 * band as u32;
    let inner = frame.frame_mut();
    let stride = inner.stride();
    for row in inner.as_bytes_mut().chunks_exact_mut(stride) {
        for i in 0..band {
            let li = i * CHANNELS;
            let ri = (width - 1 - i) * CHANNELS;
            let mix = (band - i) as u32;
            let keep = denom - mix;
            for c in 0..CHANNELS {
                let l = u32::from(row[li + c]);
                let r = u32::from(row[ri + c]);
                // Round half up.
                row[li + c] = ((keep * l + mix * r + band as u32) / denom) as u8;
                row[ri + c] = ((keep * r + mix * l + band as u32) / denom) as u8;
            }
        }
    }
    Ok(())
}

/// Mean absolute per-channel difference between the first and last column,
/// normalized to `[0, 1]`.
pub fn seam_continuity(frame: &EquirectFrame) -> f64 {
    let last = (frame.width() as usize - 1) * CHANNELS;
    let stride = frame.stride();
    let total: u64 = frame
        .as_bytes()
        .chunks_exact(stride)
        .map(|row| {
            (0..CHANNELS)
                .map(|c| u64::from(row[c].abs_diff(row[last + c])))
                .sum::<u64>()
        })
        .sum();
    total as f64 / (f64::from(frame.height()) * CHANNELS as f64 * 255.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::PanoError;
    use crate::frame::Frame;

    /// 8x4 frame: black left half, white right half.
    fn black_white() -> EquirectFrame {
        let f = Frame::from_fn(8, 4, |x, _| if x < 4 { [0; 3] } else { [255; 3] }).unwrap();
        EquirectFrame::new(f).unwrap()
    }

    #[test]
    fn zero_band_is_identity() {
        let f = black_white();
        assert_eq!(edge_blend(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn rejects_band_out_of_range() {
        let f = black_white();
        for bad in [-0.01, 0.5, 0.9, f64::NAN] {
            assert!(matches!(
                edge_blend(&f, bad),
                Err(PanoError::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn black_white_toy_blends_to_mid_gray() {
        // band_frac 0.25 on 8 columns -> 2 columns per side.
        let f = black_white();
        assert_eq!(band_columns(8, 0.25), 2);
        let out = edge_blend(&f, 0.25).unwrap();
        for y in 0..4 {
            // w(0) = 0.5: 0.5 * 0 + 0.5 * 255 = 127.5, rounds to 128.
            assert_eq!(out.pixel(0, y), [128; 3]);
            assert_eq!(out.pixel(7, y), [128; 3]);
            // w(1) = 0.25: 0.25 * 255 = 63.75 -> 64, and 191.25 -> 191.
            assert_eq!(out.pixel(1, y), [64; 3]);
            assert_eq!(out.pixel(6, y), [191; 3]);
            // Outside the band.
            assert_eq!(out.pixel(2, y), [0; 3]);
            assert_eq!(out.pixel(5, y), [255; 3]);
        }
    }

    #[test]
    fn seam_metric_examples() {
        let uniform = EquirectFrame::filled(8, [40, 50, 60]).unwrap();
        assert_eq!(seam_continuity(&uniform), 0.0);
        let f = black_white();
        assert_eq!(seam_continuity(&f), 1.0);
        let blended = edge_blend(&f, 0.25).unwrap();
        assert!(seam_continuity(&blended) < seam_continuity(&f));
        assert_eq!(seam_continuity(&blended), 0.0);
    }

    #[test]
    fn matching_edges_are_fixed_point() {
        // Mirror-symmetric frame: column i equals column width - 1 - i.
        let f = Frame::from_fn(16, 8, |x, y| {
            let m = x.min(15 - x);
            [(m * 20) as u8, (y * 30) as u8, 7]
        })
        .unwrap();
        let pano = EquirectFrame::new(f).unwrap();
        assert_eq!(edge_blend(&pano, 0.2).unwrap(), pano);
    }
}
