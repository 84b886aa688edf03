use crate::DspError;

/// Sliding windows `[start, end)` of `window` samples advancing by
/// `window - overlap`. Returns no windows when the series is shorter than one
/// window.
pub fn window_slices(length: usize, window: usize, overlap: usize) -> Result<Vec<(usize, usize)>, DspError> {
    if window == 0 || overlap >= window {
        return Err(DspError::BadWindow { window, overlap });
    }
    if length < window {
        return Ok(Vec::new());
    }
    let stride = window - overlap;
    Ok((0..=(length - window) / stride)
        .map(|k| (k * stride, k * stride + window))
        .collect())
}
