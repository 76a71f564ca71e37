//! Horizontal view direction and yaw recentering.
//!
//! Positive yaw points to the right of the current view center. Recentering
//! by `+θ` shifts content left so the column θ degrees to the right of the
//! center lands in the middle of the frame. Shifts are whole columns, which
//! keeps recentering lossless and exactly invertible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PanoError, Result};
use crate::frame::{EquirectFrame, Frame, CHANNELS};

/// A yaw angle in degrees, normalized to `[-180, 180)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct YawAngle(f64);

impl YawAngle {
    pub const ZERO: YawAngle = YawAngle(0.0);

    pub fn new(degrees: f64) -> Result<Self> {
        normalize_yaw(degrees)
    }

    pub fn degrees(self) -> f64 {
        self.0
    }
}

/// Composition of turns, wrapped back into `[-180, 180)`.
impl std::ops::Add for YawAngle {
    type Output = YawAngle;

    fn add(self, other: YawAngle) -> YawAngle {
        // Both inputs are finite and bounded, so the sum is too.
        YawAngle(wrap_degrees(self.0 + other.0))
    }
}

impl TryFrom<f64> for YawAngle {
    type Error = PanoError;

    fn try_from(degrees: f64) -> Result<Self> {
        normalize_yaw(degrees)
    }
}

impl From<YawAngle> for f64 {
    fn from(yaw: YawAngle) -> f64 {
        yaw.0
    }
}

impl fmt::Display for YawAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}°", self.0)
    }
}

/// Maps any finite angle onto the canonical range `[-180, 180)`.
pub fn normalize_yaw(degrees: f64) -> Result<YawAngle> {
    if !degrees.is_finite() {
        return Err(PanoError::InvalidAngle(degrees));
    }
    Ok(YawAngle(wrap_degrees(degrees)))
}

fn wrap_degrees(degrees: f64) -> f64 {
    // `%` is exact, and so are the corrections by 360 because both operands
    // lie within a factor of two of each other. In-range input comes back
    // unchanged, bit for bit.
    let r = degrees % 360.0;
    let out = if r >= 180.0 {
        r - 360.0
    } else if r < -180.0 {
        r + 360.0
    } else {
        r
    };
    // Avoid handing out -0.0, which would print and serialize oddly.
    if out == 0.0 {
        0.0
    } else {
        out
    }
}

/// Converts a yaw into a signed column offset for a frame `width` pixels wide:
/// `round(yaw / 360 * width)`.
///
/// Exact half-column ties round toward zero, so the mapping is odd in yaw and
/// the offset never exceeds half the width.
pub fn yaw_to_shift(yaw: YawAngle, width: u32) -> i64 {
    // Multiplying first keeps the numerator exact, so true half-column ties
    // stay exactly representable after the single rounding division.
    let exact = yaw.degrees() * f64::from(width) / 360.0;
    let nearest = exact.round();
    if (nearest - exact).abs() == 0.5 {
        exact.trunc() as i64
    } else {
        nearest as i64
    }
}

/// Rotates every row of `frame` left by `offset` columns (right for negative
/// offsets), wrapping around the seam: output column `c` takes input column
/// `(c + offset) mod width`.
pub fn shift_columns(frame: &Frame, offset: i64) -> Frame {
    let width = i64::from(frame.width());
    let s = offset.rem_euclid(width) as usize * CHANNELS;
    if s == 0 {
        return frame.clone();
    }
    let stride = frame.stride();
    let mut out = Vec::with_capacity(frame.as_bytes().len());
    for row in frame.as_bytes().chunks_exact(stride) {
        out.extend_from_slice(&row[s..]);
        out.extend_from_slice(&row[..s]);
    }
    Frame::new(frame.width(), frame.height(), out).expect("shift preserves dimensions")
}

/// Recenters an equirect frame so the direction `yaw` becomes the horizontal
/// center.
pub fn recenter(frame: &EquirectFrame, yaw: YawAngle) -> EquirectFrame {
    let shifted = shift_columns(frame.as_frame(), yaw_to_shift(yaw, frame.width()));
    EquirectFrame::new(shifted).expect("shift preserves equirect geometry")
}
