use pano_agents::DEFAULT_DURATION_S;
use pano_core::{ProjectionParams, DEFAULT_FPS};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SessionError};

pub const DEFAULT_TARGET_SEGMENTS: usize = 3;
pub const MAX_TARGET_SEGMENTS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub target_segments: usize,
    pub segment_duration_s: f64,
    pub fps: u32,
    /// Base seed; segment `k` generates with `seed + k` (wrapping).
    pub seed: u64,
    pub params: ProjectionParams,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            target_segments: DEFAULT_TARGET_SEGMENTS,
            segment_duration_s: DEFAULT_DURATION_S,
            fps: DEFAULT_FPS,
            seed: 0,
            params: ProjectionParams::default(),
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_TARGET_SEGMENTS).contains(&self.target_segments) {
            return Err(SessionError::InvalidConfig(format!(
                "target_segments must be in 1..={MAX_TARGET_SEGMENTS}, got {}",
                self.target_segments
            )));
        }
        if !(self.segment_duration_s.is_finite() && self.segment_duration_s > 0.0) {
            return Err(SessionError::InvalidConfig(format!(
                "segment_duration_s must be positive, got {}",
                self.segment_duration_s
            )));
        }
        if self.fps == 0 {
            return Err(SessionError::InvalidConfig("fps must be positive".into()));
        }
        if self.frames_per_segment() == 0 {
            return Err(SessionError::InvalidConfig(
                "segment duration rounds to zero frames".into(),
            ));
        }
        self.params.validate()?;
        Ok(())
    }

    pub fn frames_per_segment(&self) -> usize {
        (self.segment_duration_s * f64::from(self.fps)).round() as usize
    }

    pub fn segment_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_three_ten_second_segments() {
        let c = SessionConfig::default();
        c.validate().unwrap();
        assert_eq!(c.target_segments, 3);
        assert_eq!(c.frames_per_segment(), 240);
    }

    #[test]
    fn rejects_out_of_range() {
        let bad = |f: fn(&mut SessionConfig)| {
            let mut c = SessionConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.target_segments = 0));
        assert!(bad(|c| c.target_segments = 33));
        assert!(bad(|c| c.segment_duration_s = 0.0));
        assert!(bad(|c| c.segment_duration_s = f64::NAN));
        assert!(bad(|c| c.fps = 0));
        assert!(bad(|c| c.params.blend_band_frac = 0.5));
        let ok = SessionConfig {
            target_segments: 32,
            ..SessionConfig::default()
        };
        ok.validate().unwrap();
    }
}
