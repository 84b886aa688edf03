//! Central finite-difference gradient verification.

use crate::Params;

/// Smallest denominator used when comparing gradients, so that entries that
/// are zero in both the analytic and numeric gradient compare as equal.
pub const REL_FLOOR: f64 = 1e-7;

/// Numeric gradient of `loss` at `params`, one vector per tensor.
pub fn numeric_gradient<P: Params + Clone>(params: &P, eps: f64, loss: impl Fn(&P) -> f64) -> Vec<Vec<f64>> {
    let mut probe = params.clone();
    let lens: Vec<usize> = params.param_slices().iter().map(|s| s.len()).collect();
    let mut out = Vec::with_capacity(lens.len());
    for (t, &len) in lens.iter().enumerate() {
        let mut g = vec![0.0; len];
        for (k, gk) in g.iter_mut().enumerate() {
            let orig = probe.param_slices()[t][k];
            probe.param_slices_mut()[t][k] = orig + eps;
            let up = loss(&probe);
            probe.param_slices_mut()[t][k] = orig - eps;
            let down = loss(&probe);
            probe.param_slices_mut()[t][k] = orig;
            *gk = (up - down) / (2.0 * eps);
        }
        out.push(g);
    }
    out
}

/// `|a − n| / max(|a|, |n|, REL_FLOOR)`.
pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(REL_FLOOR)
}

/// Largest relative error of each tensor of `analytic` against `numeric`.
pub fn max_relative_errors<P: Params>(analytic: &P, numeric: &[Vec<f64>]) -> Vec<f64> {
    analytic
        .param_slices()
        .iter()
        .zip(numeric)
        .map(|(a, n)| {
            a.iter()
                .zip(n)
                .map(|(&a, &n)| relative_error(a, n))
                .fold(0.0, f64::max)
        })
        .collect()
}
