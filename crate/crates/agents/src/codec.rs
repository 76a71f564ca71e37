//! PNG encoding for frames on disk and on the wire.

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};
use pano_core::{Frame, PanoError};

/// Encodes an RGB8 PNG with fast compression.
pub fn encode_png(frame: &Frame) -> Vec<u8> {
    let mut out = Vec::new();
    PngEncoder::new_with_quality(&mut out, CompressionType::Fast, FilterType::Sub)
        .write_image(
            frame.as_bytes(),
            frame.width(),
            frame.height(),
            ExtendedColorType::Rgb8,
        )
        .expect("encoding into memory cannot fail");
    out
}

/// Decodes any PNG into RGB8, dropping alpha and widening gray.
pub fn decode_png(bytes: &[u8]) -> Result<Frame, PanoError> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| PanoError::InvalidInput(format!("bad PNG: {e}")))?
        .into_rgb8();
    let (w, h) = img.dimensions();
    Frame::new(w, h, img.into_raw())
}

/// Reads the image dimensions from the PNG header without decoding pixels.
pub fn png_dimensions(bytes: &[u8]) -> Result<(u32, u32), PanoError> {
    image::ImageReader::with_format(std::io::Cursor::new(bytes), image::ImageFormat::Png)
        .into_dimensions()
        .map_err(|e| PanoError::InvalidInput(format!("bad PNG: {e}")))
}
