//! Pure transforms that turn flat generated video into seamless
//! equirectangular panoramas and recenter them by yaw.
//!
//! Everything here is a deterministic function of its inputs and safe to
//! call from any number of threads.

pub mod blur;
pub mod clip;
pub mod error;
pub mod frame;
pub mod projection;
pub mod resample;
pub mod seam;
pub mod yaw;

pub use blur::{blur_background, gaussian_blur, gaussian_kernel};
pub use clip::{concat, last_frame, Clip, DEFAULT_FPS};
pub use error::{PanoError, Result};
pub use frame::{EquirectFrame, Frame};
pub use projection::{foreground_rect, render_background, to_equirect, ForegroundRect, ProjectionParams};
pub use resample::resize_bilinear;
pub use seam::{edge_blend, seam_continuity};
pub use yaw::{normalize_yaw, recenter, shift_columns, yaw_to_shift, YawAngle};
