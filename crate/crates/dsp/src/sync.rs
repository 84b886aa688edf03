use gaitforge_core::{InsoleStream, MocapStream};

use crate::{interp_linear, xcorr_lag, DspError};

/// Correlation grid spacing: 200 Hz, the mocap rate.
pub const SYNC_GRID_US: i64 = 5_000;
/// Largest clock offset searched by [`sync_streams`].
pub const SYNC_MAX_LAG_US: i64 = 400_000;
const MIN_OVERLAP_US: i64 = 1_000_000;

fn on_grid(times_us: &[u64], values: &[f64], grid: &[f64]) -> Vec<f64> {
    let xs: Vec<f64> = times_us.iter().map(|&t| t as f64).collect();
    interp_linear(&xs, values, grid)
}

/// Clock offset between an insole stream and a mocap stream, in
/// microseconds, such that `insole_time = mocap_time + offset`.
///
/// Total insole vertical force and mocap vertical GRF are resampled onto a
/// shared 5 ms grid over the overlap of their timestamp ranges and aligned by
/// [`xcorr_lag`]. The result is quantized to the grid.
pub fn sync_streams(insole: &InsoleStream, mocap: &MocapStream) -> Result<i64, DspError> {
    sync_streams_with(insole, mocap, SYNC_MAX_LAG_US)
}

/// [`sync_streams`] with an explicit search range.
pub fn sync_streams_with(
    insole: &InsoleStream,
    mocap: &MocapStream,
    max_lag_us: i64,
) -> Result<i64, DspError> {
    let (is, ie) = insole.span_us().ok_or(DspError::EmptyStream)?;
    let (ms, me) = mocap.span_us().ok_or(DspError::EmptyStream)?;
    let start = is.max(ms) as i64;
    let end = ie.min(me) as i64;
    let overlap = end - start;
    if overlap < MIN_OVERLAP_US {
        return Err(DspError::InsufficientOverlap {
            overlap_us: overlap,
            needed_us: MIN_OVERLAP_US,
        });
    }
    let first = (start + SYNC_GRID_US - 1).div_euclid(SYNC_GRID_US) * SYNC_GRID_US;
    let grid: Vec<f64> = (0..)
        .map(|k| first + k * SYNC_GRID_US)
        .take_while(|&t| t <= end)
        .map(|t| t as f64)
        .collect();
    let insole_f = on_grid(&insole.times_us(), &insole.total_vertical_force(), &grid);
    let mocap_f = on_grid(&mocap.times_us(), &mocap.grf_z(), &grid);
    let max_lag = (max_lag_us / SYNC_GRID_US).max(0) as usize;
    let max_lag = max_lag.min(grid.len().saturating_sub(2));
    let lag = xcorr_lag(&mocap_f, &insole_f, max_lag)?;
    Ok(lag * SYNC_GRID_US)
}
