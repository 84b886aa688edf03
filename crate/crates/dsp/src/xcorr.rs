use crate::DspError;

const MIN_OVERLAP: usize = 2;

fn pearson_overlap(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

fn has_variance(x: &[f64]) -> bool {
    x.iter().any(|&v| v != x[0])
}

/// Lag (in samples) maximizing the normalized cross-correlation of `a` and
/// `b` over `[-max_lag, max_lag]`, with the convention `b[i + lag] ≈ a[i]`.
/// A positive lag therefore means `b` is a delayed copy of `a`.
///
/// Each lag is scored by the Pearson correlation of the overlapping parts, so
/// shrinking overlap at large lags does not bias the estimate. Ties go to the
/// smaller |lag|, and between ±lag to the negative one.
pub fn xcorr_lag(a: &[f64], b: &[f64], max_lag: usize) -> Result<i64, DspError> {
    let shortest = a.len().min(b.len());
    if shortest <= max_lag {
        return Err(DspError::TooShort {
            needed: max_lag,
            got: shortest,
        });
    }
    if !has_variance(a) || !has_variance(b) {
        return Err(DspError::DegenerateSignal);
    }
    let score = |lag: i64| -> Option<f64> {
        let (sa, sb) = if lag >= 0 {
            let l = lag as usize;
            let len = a.len().min(b.len().saturating_sub(l));
            (&a[..len], &b[l..l + len])
        } else {
            let l = (-lag) as usize;
            let len = b.len().min(a.len().saturating_sub(l));
            (&a[l..l + len], &b[..len])
        };
        if sa.len() < MIN_OVERLAP {
            return None;
        }
        pearson_overlap(sa, sb)
    };
    let mut best: Option<(i64, f64)> = None;
    let mut consider = |lag: i64| {
        if let Some(r) = score(lag) {
            if best.is_none_or(|(_, br)| r > br) {
                best = Some((lag, r));
            }
        }
    };
    consider(0);
    for k in 1..=max_lag as i64 {
        consider(-k);
        consider(k);
    }
    best.map(|(lag, _)| lag).ok_or(DspError::DegenerateSignal)
}
