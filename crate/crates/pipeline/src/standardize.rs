use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

const MIN_STD: f64 = 1e-8;

/// Per-feature affine normalization fitted on training data. Stored with a
/// model so raw inputs can be fed at inference time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Fits over every row of every block. Constant features get unit scale.
    pub fn fit<'a>(blocks: impl IntoIterator<Item = ArrayView2<'a, f64>>, features: usize) -> Self {
        let mut n = 0usize;
        let mut sum = vec![0.0; features];
        let mut sq = vec![0.0; features];
        for b in blocks {
            for row in b.rows() {
                n += 1;
                for (j, &v) in row.iter().enumerate() {
                    sum[j] += v;
                    sq[j] += v * v;
                }
            }
        }
        let n = n.max(1) as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| {
                let s = (q / n - m * m).max(0.0).sqrt();
                if s < MIN_STD {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn identity(features: usize) -> Self {
        Self {
            mean: vec![0.0; features],
            std: vec![1.0; features],
        }
    }

    pub fn features(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        out
    }
}
