use ndarray::{Array2, ArrayView2};

use crate::NnError;

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn softmax_rows(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.rows_mut() {
        let p = softmax(&row.to_vec());
        row.iter_mut().zip(p).for_each(|(v, p)| *v = p);
    }
    out
}

/// Class-weighted cross entropy over a batch of logits `(B, C)`.
///
/// Each sample contributes `w[y] · −log softmax(logits)[y]`; the batch loss is
/// the sum divided by `Σ w[y]` (weighted mean). Returns the loss and its
/// gradient with respect to the logits.
pub fn weighted_cross_entropy(
    logits: ArrayView2<'_, f64>,
    targets: &[usize],
    class_weights: &[f64],
) -> Result<(f64, Array2<f64>), NnError> {
    let (batch, classes) = logits.dim();
    if targets.len() != batch || class_weights.len() != classes {
        return Err(NnError::Shape(format!(
            "cross entropy: {batch} rows, {} targets, {classes} classes, {} weights",
            targets.len(),
            class_weights.len()
        )));
    }
    if class_weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(NnError::BadWeights);
    }
    if let Some(&t) = targets.iter().find(|&&t| t >= classes) {
        return Err(NnError::TargetOutOfRange { target: t, classes });
    }
    let probs = softmax_rows(logits);
    let norm: f64 = targets.iter().map(|&t| class_weights[t]).sum();
    let mut loss = 0.0;
    let mut grad = probs.clone();
    for (b, &t) in targets.iter().enumerate() {
        let w = class_weights[t];
        // log-softmax computed directly to stay finite for extreme logits.
        let row = logits.row(b);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
        loss += w * (lse - row[t]);
        grad[(b, t)] -= 1.0;
        grad.row_mut(b).mapv_inplace(|g| g * w / norm);
    }
    Ok((loss / norm, grad))
}

/// Mean absolute error and its subgradient (0 where prediction equals target).
pub fn mae_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>), NnError> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(NnError::Shape(format!(
            "MAE needs equal non-empty lengths, got {} and {}",
            pred.len(),
            target.len()
        )));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let d = p - t;
            loss += d.abs();
            if d > 0.0 {
                1.0 / n
            } else if d < 0.0 {
                -1.0 / n
            } else {
                0.0
            }
        })
        .collect();
    Ok((loss / n, grad))
}
