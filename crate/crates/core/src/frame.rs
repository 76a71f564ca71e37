//! Dense 8-bit RGB rasters.

use std::fmt;
use std::ops::Deref;

use sha2::{Digest, Sha256};

use crate::error::{PanoError, Result};

/// Bytes per pixel; frames are always packed RGB.
pub const CHANNELS: usize = 3;

/// Smallest legal edge length of a frame.
pub const MIN_DIM: u32 = 2;

/// A row-major RGB frame with 8 bits per channel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Frame {
    /// Wraps an existing pixel buffer, checking its length against the
    /// dimensions.
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        let expected = buffer_len(width, height);
        if data.len() != expected {
            return Err(PanoError::InvalidInput(format!(
                "pixel buffer holds {} bytes, {width}x{height} RGB needs {expected}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// A frame with every pixel set to `rgb`.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(buffer_len(width, height))
            .collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a frame by evaluating `f(x, y)` for each pixel.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(buffer_len(width, height));
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    /// Number of bytes in one row.
    pub fn stride(&self) -> usize {
        self.width as usize * CHANNELS
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let stride = self.stride();
        let start = y as usize * stride;
        &self.data[start..start + stride]
    }

    pub fn row_mut(&mut self, y: u32) -> &mut [u8] {
        let stride = self.stride();
        let start = y as usize * stride;
        &mut self.data[start..start + stride]
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * CHANNELS;
        self.data[i..i + CHANNELS].copy_from_slice(&rgb);
    }

    /// Mean channel value over the whole frame.
    pub fn mean_intensity(&self) -> f64 {
        let sum: u64 = self.data.iter().map(|&v| u64::from(v)).sum();
        sum as f64 / self.data.len() as f64
    }

    /// Feeds the dimensions and pixels into a running digest.
    pub fn digest_into(&self, hasher: &mut Sha256) {
        hasher.update(self.width.to_le_bytes());
        hasher.update(self.height.to_le_bytes());
        hasher.update(&self.data);
    }

    /// Hex SHA-256 of dimensions and pixels.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        self.digest_into(&mut hasher);
        hex::encode(hasher.finalize())
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Frame")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

/// A frame whose width is exactly twice its height, so columns span 360°
/// of longitude and the left and right edges meet at the same meridian.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EquirectFrame(Frame);

impl EquirectFrame {
    pub fn new(frame: Frame) -> Result<Self> {
        if frame.width != 2 * frame.height {
            return Err(PanoError::NotEquirect {
                width: frame.width,
                height: frame.height,
            });
        }
        Ok(Self(frame))
    }

    /// Uniform equirect canvas of the given width.
    pub fn filled(width: u32, rgb: [u8; 3]) -> Result<Self> {
        if width % 2 != 0 {
            return Err(PanoError::InvalidParameter(format!(
                "equirect width must be even, got {width}"
            )));
        }
        Self::new(Frame::filled(width, width / 2, rgb)?)
    }

    pub fn as_frame(&self) -> &Frame {
        &self.0
    }

    pub fn into_frame(self) -> Frame {
        self.0
    }

    pub(crate) fn frame_mut(&mut self) -> &mut Frame {
        &mut self.0
    }
}

impl Deref for EquirectFrame {
    type Target = Frame;

    fn deref(&self) -> &Frame {
        &self.0
    }
}

impl TryFrom<Frame> for EquirectFrame {
    type Error = PanoError;

    fn try_from(frame: Frame) -> Result<Self> {
        Self::new(frame)
    }
}

impl From<EquirectFrame> for Frame {
    fn from(frame: EquirectFrame) -> Frame {
        frame.0
    }
}

impl fmt::Debug for EquirectFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("EquirectFrame").field(&self.0).finish()
    }
}

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width < MIN_DIM || height < MIN_DIM {
        return Err(PanoError::InvalidInput(format!(
            "frame must be at least {MIN_DIM}x{MIN_DIM}, got {width}x{height}"
        )));
    }
    Ok(())
}

fn buffer_len(width: u32, height: u32) -> usize {
    width as usize * height as usize * CHANNELS
}
