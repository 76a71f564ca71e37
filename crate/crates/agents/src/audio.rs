//! Mono 16 kHz PCM16 speech input and its RIFF WAV container.

use sha2::{Digest, Sha256};

use crate::error::{AgentError, Result};

pub const SAMPLE_RATE: u32 = 16_000;

const PCM_FORMAT: u16 = 1;

/// Recorded speech. A zero-length recording is representable; transcribing
/// it yields [`AgentError::EmptyTranscription`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioInput {
    samples: Vec<i16>,
}

impl AudioInput {
    pub fn new(samples: Vec<i16>, sample_rate: u32) -> Result<Self> {
        if sample_rate != SAMPLE_RATE {
            return Err(AgentError::InvalidAudio(format!(
                "expected {SAMPLE_RATE} Hz, got {sample_rate} Hz"
            )));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[i16] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        SAMPLE_RATE
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / f64::from(SAMPLE_RATE)
    }

    /// Hex SHA-256 of the little-endian sample bytes. Container metadata
    /// does not affect it.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for s in &self.samples {
            hasher.update(s.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// Parses a RIFF WAV file holding PCM16 mono at 16 kHz.
    pub fn from_wav(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| AgentError::InvalidAudio(msg.to_owned());
        if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
            return Err(bad("not a RIFF/WAVE file"));
        }
        let mut fmt: Option<(u16, u16, u32, u16)> = None;
        let mut data: Option<&[u8]> = None;
        let mut pos = 12;
        while pos + 8 <= bytes.len() {
            let id = &bytes[pos..pos + 4];
            let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
            let body_start = pos + 8;
            let body_end = body_start
                .checked_add(size)
                .filter(|&e| e <= bytes.len())
                .ok_or_else(|| bad("truncated chunk"))?;
            let body = &bytes[body_start..body_end];
            match id {
                b"fmt " => {
                    if body.len() < 16 {
                        return Err(bad("fmt chunk too short"));
                    }
                    let le16 = |i: usize| u16::from_le_bytes([body[i], body[i + 1]]);
                    let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                    fmt = Some((le16(0), le16(2), rate, le16(14)));
                }
                b"data" => data = Some(body),
                _ => {}
            }
            // Chunks are padded to even length.
            pos = body_end + (size & 1);
        }
        let (format, channels, rate, bits) = fmt.ok_or_else(|| bad("missing fmt chunk"))?;
        if format != PCM_FORMAT {
            return Err(bad(&format!("unsupported format tag {format}, need PCM")));
        }
        if channels != 1 {
            return Err(bad(&format!("need mono audio, got {channels} channels")));
        }
        if bits != 16 {
            return Err(bad(&format!("need 16-bit samples, got {bits}-bit")));
        }
        let data = data.ok_or_else(|| bad("missing data chunk"))?;
        if data.len() % 2 != 0 {
            return Err(bad("odd-length sample data"));
        }
        let samples = data
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes([b[0], b[1]]))
            .collect();
        Self::new(samples, rate)
    }

    /// Serializes as a canonical 44-byte-header WAV file.
    pub fn to_wav(&self) -> Vec<u8> {
        let data_len = (self.samples.len() * 2) as u32;
        let mut out = Vec::with_capacity(44 + data_len as usize);
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data_len).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&PCM_FORMAT.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&SAMPLE_RATE.to_le_bytes());
        out.extend_from_slice(&(SAMPLE_RATE * 2).to_le_bytes());
        out.extend_from_slice(&2u16.to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&data_len.to_le_bytes());
        for s in &self.samples {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }
}
