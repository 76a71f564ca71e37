//! Throughput of the per-frame transforms. The core transforms run on the
//! calling thread, so these are single-core figures.

use std::hint::black_box;
use std::time::{Duration, Instant};

use pano_core::{recenter, to_equirect, Frame, ProjectionParams, YawAngle};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Source frames are projected from this size, a common generator output.
pub const SOURCE_SIZE: (u32, u32) = (1280, 768);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub width: u32,
    pub height: u32,
    pub source_width: u32,
    pub source_height: u32,
    pub recenter_frames: usize,
    pub recenter_fps: f64,
    pub to_equirect_frames: usize,
    pub to_equirect_fps: f64,
}

/// Textured content so nothing benefits from flat regions.
pub fn bench_source(width: u32, height: u32) -> Frame {
    Frame::from_fn(width, height, |x, y| {
        let h = x.wrapping_mul(2_654_435_761) ^ y.wrapping_mul(40_503);
        [(x ^ y) as u8, (h >> 8) as u8, (x.wrapping_add(3 * y) >> 2) as u8]
    })
    .expect("bench source dimensions are valid")
}

/// Repeats `op` until `min` has elapsed and at least `min_iters` ran.
fn measure(min: Duration, min_iters: usize, mut op: impl FnMut(usize)) -> (usize, f64) {
    let start = Instant::now();
    let mut n = 0;
    while n < min_iters || start.elapsed() < min {
        op(n);
        n += 1;
    }
    (n, n as f64 / start.elapsed().as_secs_f64())
}

pub fn run_bench(width: u32, seconds: f64) -> Result<BenchReport> {
    let params = ProjectionParams::with_width(width);
    params.validate().map_err(CliError::usage)?;
    if !(seconds.is_finite() && seconds > 0.0) {
        return Err(CliError::Usage(format!("--seconds must be positive, got {seconds}")));
    }
    let min = Duration::from_secs_f64(seconds);
    let source = bench_source(SOURCE_SIZE.0, SOURCE_SIZE.1);
    let pano = to_equirect(&source, &params).map_err(|e| CliError::Internal(e.to_string()))?;

    // Warm up caches and the allocator before timing.
    black_box(recenter(&pano, YawAngle::new(10.0).expect("finite")));
    let (recenter_frames, recenter_fps) = measure(min, 10, |i| {
        let yaw = YawAngle::new((i % 359) as f64 + 1.0).expect("finite");
        black_box(recenter(black_box(&pano), yaw));
    });
    let (to_equirect_frames, to_equirect_fps) = measure(min, 3, |_| {
        black_box(to_equirect(black_box(&source), &params).expect("validated params"));
    });
    Ok(BenchReport {
        width,
        height: params.out_height(),
        source_width: SOURCE_SIZE.0,
        source_height: SOURCE_SIZE.1,
        recenter_frames,
        recenter_fps,
        to_equirect_frames,
        to_equirect_fps,
    })
}
