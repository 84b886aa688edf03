use ndarray::{Array2, ArrayView2};

use crate::DspError;

/// Points per time-normalized stride (0 % to 100 % inclusive).
pub const STRIDE_POINTS: usize = 101;

/// Linear interpolation of `ys` sampled at increasing `xs`, evaluated at
/// increasing `query` positions. Queries outside the data clamp to the
/// nearest endpoint.
pub fn interp_linear(xs: &[f64], ys: &[f64], query: &[f64]) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len(), "xs/ys length mismatch");
    assert!(!xs.is_empty(), "interpolating an empty series");
    let n = xs.len();
    let mut j = 0usize;
    query
        .iter()
        .map(|&q| {
            if q <= xs[0] {
                return ys[0];
            }
            if q >= xs[n - 1] {
                return ys[n - 1];
            }
            while j + 1 < n && xs[j + 1] < q {
                j += 1;
            }
            while j > 0 && xs[j] > q {
                j -= 1;
            }
            let (x0, x1) = (xs[j], xs[j + 1]);
            let w = (q - x0) / (x1 - x0);
            ys[j] + w * (ys[j + 1] - ys[j])
        })
        .collect()
}

/// Value at fractional sample position `p` of a uniformly sampled series.
fn at_position(series: &[f64], p: f64) -> f64 {
    let last = series.len() - 1;
    let i = (p.floor() as usize).min(last);
    if i == last {
        return series[last];
    }
    let w = p - i as f64;
    if w == 0.0 {
        series[i]
    } else {
        series[i] + w * (series[i + 1] - series[i])
    }
}

/// Resample a uniformly sampled series from `src_rate` to `dst_rate` by linear
/// interpolation. Output sample k sits at time k / dst_rate; the output runs
/// as far as the last source sample, so the first sample is always kept and
/// the last one whenever it falls on the destination grid.
pub fn resample_linear(series: &[f64], src_rate: f64, dst_rate: f64) -> Result<Vec<f64>, DspError> {
    if !(src_rate > 0.0 && dst_rate > 0.0) {
        return Err(DspError::BadRate);
    }
    if series.len() < 2 {
        return Err(DspError::TooShort {
            needed: 1,
            got: series.len(),
        });
    }
    if src_rate == dst_rate {
        return Ok(series.to_vec());
    }
    let duration = (series.len() - 1) as f64 / src_rate;
    let m = (duration * dst_rate + 1e-9).floor() as usize + 1;
    Ok((0..m)
        .map(|k| at_position(series, k as f64 * src_rate / dst_rate))
        .collect())
}

/// Stretch a single-channel segment onto `n` equally spaced points including
/// both endpoints.
pub fn time_normalize_1d(segment: &[f64], n: usize) -> Result<Vec<f64>, DspError> {
    if segment.len() < 2 {
        return Err(DspError::TooShort {
            needed: 1,
            got: segment.len(),
        });
    }
    if n < 2 {
        return Err(DspError::TooShort { needed: 1, got: n });
    }
    let scale = (segment.len() - 1) as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|k| at_position(segment, k as f64 * scale))
        .collect())
}

/// Multichannel version of [`time_normalize_1d`]; rows are time, columns channels.
pub fn time_normalize(segment: ArrayView2<'_, f64>, n: usize) -> Result<Array2<f64>, DspError> {
    let (len, channels) = segment.dim();
    let mut out = Array2::zeros((n, channels));
    for c in 0..channels {
        let col: Vec<f64> = segment.column(c).to_vec();
        let norm = time_normalize_1d(&col, n).map_err(|_| DspError::TooShort {
            needed: 1,
            got: len,
        })?;
        out.column_mut(c).assign(&ndarray::Array1::from(norm));
    }
    if channels == 0 && len < 2 {
        return Err(DspError::TooShort { needed: 1, got: len });
    }
    Ok(out)
}
