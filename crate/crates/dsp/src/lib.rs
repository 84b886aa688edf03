//! Signal processing for insole, pose and mocap streams.
//!
//! Everything here is a pure function of its inputs; streams from different
//! trials can be processed in parallel without coordination.

mod filter;
mod kinematics;
mod resample;
mod segment;
mod sync;
mod window;
mod xcorr;

use thiserror::Error;

pub use filter::{butterworth_lowpass, filtfilt, Biquad, BiquadCascade};
pub use kinematics::knee_angle;
pub use resample::{interp_linear, resample_linear, time_normalize, time_normalize_1d, STRIDE_POINTS};
pub use segment::{detect_sit_stand, detect_strides, StrideBounds, StrideConfig};
pub use sync::{sync_streams, sync_streams_with, SYNC_GRID_US, SYNC_MAX_LAG_US};
pub use window::window_slices;
pub use xcorr::xcorr_lag;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("filter order must be even and positive, got {0}")]
    BadOrder(usize),
    #[error("cutoff {cutoff} Hz must lie in (0, {nyquist}) Hz")]
    CutoffAboveNyquist { cutoff: f64, nyquist: f64 },
    #[error("signal too short: need more than {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("sample rates must be positive")]
    BadRate,
    #[error("degenerate signal")]
    DegenerateSignal,
    #[error("degenerate points: knee coincides with hip or ankle")]
    DegeneratePoints,
    #[error("points must share a dimension of 2 or 3")]
    BadDimension,
    #[error("window ({window}) must exceed overlap ({overlap})")]
    BadWindow { window: usize, overlap: usize },
    #[error("streams overlap for {overlap_us} µs, need at least {needed_us} µs")]
    InsufficientOverlap { overlap_us: i64, needed_us: i64 },
    #[error("empty stream")]
    EmptyStream,
}
