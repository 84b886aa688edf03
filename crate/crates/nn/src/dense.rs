use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand::distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::params::{slice_of, slice_of_mut};
use crate::{shape_err, softmax_rows, NnError, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
    Softmax,
}

/// Fully connected layer `y = act(x Wᵀ + b)` applied row-wise to `(N, I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `O × I`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    x: Array2<f64>,
    y: Array2<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        Self {
            w: Array2::zeros((output, input)),
            b: Array1::zeros(output),
            activation,
        }
    }

    /// Uniform(−1/√I, 1/√I) initialization.
    pub fn new(input: usize, output: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        let mut d = Self::zeros(input, output, activation);
        let k = 1.0 / (input as f64).sqrt();
        let dist = Uniform::new_inclusive(-k, k).expect("valid bounds");
        for s in d.param_slices_mut() {
            for v in s {
                *v = dist.sample(rng);
            }
        }
        d
    }

    pub fn input_size(&self) -> usize {
        self.w.ncols()
    }

    pub fn output_size(&self) -> usize {
        self.w.nrows()
    }

    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, DenseCache), NnError> {
        if x.ncols() != self.input_size() {
            return shape_err(format!(
                "dense layer expects {} inputs, got {}",
                self.input_size(),
                x.ncols()
            ));
        }
        let mut y = x.dot(&self.w.t());
        y += &self.b;
        match self.activation {
            Activation::Linear => {}
            Activation::Relu => y.mapv_inplace(|v| v.max(0.0)),
            Activation::Softmax => y = softmax_rows(y.view()),
        }
        let cache = DenseCache {
            x: x.to_owned(),
            y: y.clone(),
        };
        Ok((y, cache))
    }

    /// Returns parameter gradients and the gradient with respect to `x`.
    pub fn backward(&self, cache: &DenseCache, dy: ArrayView2<'_, f64>) -> Result<(Dense, Array2<f64>), NnError> {
        if dy.dim() != cache.y.dim() {
            return shape_err(format!(
                "dense backward expects {:?}, got {:?}",
                cache.y.dim(),
                dy.dim()
            ));
        }
        let da = match self.activation {
            Activation::Linear => dy.to_owned(),
            Activation::Relu => {
                let mut da = dy.to_owned();
                da.zip_mut_with(&cache.y, |d, &y| {
                    if y <= 0.0 {
                        *d = 0.0;
                    }
                });
                da
            }
            Activation::Softmax => {
                // dA = y ⊙ (dy − Σ dy ⊙ y) per row.
                let mut da = &dy * &cache.y;
                let dots = da.sum_axis(Axis(1));
                for (mut row, (y_row, dot)) in da.rows_mut().into_iter().zip(cache.y.rows().into_iter().zip(dots)) {
                    row.zip_mut_with(&y_row, |v, &yv| *v -= yv * dot);
                }
                da
            }
        };
        let grads = Dense {
            w: da.t().dot(&cache.x),
            b: da.sum_axis(Axis(0)),
            activation: self.activation,
        };
        let dx = da.dot(&self.w);
        Ok((grads, dx))
    }
}

impl Params for Dense {
    fn param_slices(&self) -> Vec<&[f64]> {
        vec![slice_of(&self.w), slice_of(&self.b)]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![slice_of_mut(&mut self.w), slice_of_mut(&mut self.b)]
    }

    fn shapes(&self) -> Vec<Vec<usize>> {
        vec![self.w.shape().to_vec(), self.b.shape().to_vec()]
    }
}
