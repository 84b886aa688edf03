use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Array3, ArrayView2, ArrayView3, Axis};
use rand::Rng;
use rand::distr::{Distribution, Uniform};

use crate::params::{slice_of, slice_of_mut};
use crate::{shape_err, sigmoid, NnError, Params};

/// Gated recurrent unit.
///
/// Gate blocks are stacked in the order `[r; z; n]`:
///
/// ```text
/// r  = σ(W_r x + b_ir + U_r h + b_hr)
/// z  = σ(W_z x + b_iz + U_z h + b_hz)
/// n  = tanh(W_n x + b_in + r ⊙ (U_n h + b_hn))
/// h' = (1 − z) ⊙ n + z ⊙ h
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Gru {
    /// Input weights, `3H × I`.
    pub w: Array2<f64>,
    /// Recurrent weights, `3H × H`.
    pub u: Array2<f64>,
    pub b_i: Array1<f64>,
    pub b_h: Array1<f64>,
}

/// Activations saved by [`Gru::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct GruCache {
    x: Array2<f64>,
    h_prev: Array3<f64>,
    r: Array3<f64>,
    z: Array3<f64>,
    n: Array3<f64>,
    gh_n: Array3<f64>,
}

impl Gru {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w: Array2::zeros((3 * hidden, input)),
            u: Array2::zeros((3 * hidden, hidden)),
            b_i: Array1::zeros(3 * hidden),
            b_h: Array1::zeros(3 * hidden),
        }
    }

    /// Uniform(−1/√H, 1/√H) initialization.
    pub fn new(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut g = Self::zeros(input, hidden);
        let k = 1.0 / (hidden as f64).sqrt();
        let dist = Uniform::new_inclusive(-k, k).expect("valid bounds");
        for s in g.param_slices_mut() {
            for v in s {
                *v = dist.sample(rng);
            }
        }
        g
    }

    pub fn input_size(&self) -> usize {
        self.w.ncols()
    }

    pub fn hidden_size(&self) -> usize {
        self.u.ncols()
    }

    /// Runs the layer over `x` of shape `(T, B, I)` from initial state `h0`
    /// (`(B, H)`, zeros when `None`). Returns all hidden states `(T, B, H)`.
    pub fn forward(
        &self,
        x: ArrayView3<'_, f64>,
        h0: Option<ArrayView2<'_, f64>>,
    ) -> Result<(Array3<f64>, GruCache), NnError> {
        let (t_len, batch, input) = x.dim();
        let hid = self.hidden_size();
        if input != self.input_size() {
            return shape_err(format!("GRU expects {} inputs, got {input}", self.input_size()));
        }
        let mut h = match h0 {
            Some(h0) if h0.dim() != (batch, hid) => {
                return shape_err(format!("h0 must be ({batch}, {hid}), got {:?}", h0.dim()))
            }
            Some(h0) => h0.as_standard_layout().into_owned(),
            None => Array2::zeros((batch, hid)),
        };
        let xf = x
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((t_len * batch, input))
            .expect("contiguous");
        let mut gi = xf.dot(&self.w.t());
        gi += &self.b_i;
        let gi = gi.as_standard_layout();
        let gi_all = gi.as_slice().expect("contiguous");

        let mut out = Array3::zeros((t_len, batch, hid));
        let mut h_prev = Array3::zeros((t_len, batch, hid));
        let mut r_all = Array3::zeros((t_len, batch, hid));
        let mut z_all = Array3::zeros((t_len, batch, hid));
        let mut n_all = Array3::zeros((t_len, batch, hid));
        let mut ghn_all = Array3::zeros((t_len, batch, hid));
        let mut gh = Array2::zeros((batch, 3 * hid));
        let step = batch * hid;
        for t in 0..t_len {
            h_prev.index_axis_mut(Axis(0), t).assign(&h);
            general_mat_mul(1.0, &h, &self.u.t(), 0.0, &mut gh);
            gh += &self.b_h;
            let gh_s = gh.as_slice().expect("contiguous");
            let gi_t = &gi_all[t * batch * 3 * hid..(t + 1) * batch * 3 * hid];
            let h_s = h.as_slice_mut().expect("contiguous");
            let cell = t * step..(t + 1) * step;
            let r_t = &mut r_all.as_slice_mut().expect("contiguous")[cell.clone()];
            let z_t = &mut z_all.as_slice_mut().expect("contiguous")[cell.clone()];
            let n_t = &mut n_all.as_slice_mut().expect("contiguous")[cell.clone()];
            let ghn_t = &mut ghn_all.as_slice_mut().expect("contiguous")[cell];
            for b in 0..batch {
                let gi_b = &gi_t[b * 3 * hid..(b + 1) * 3 * hid];
                let gh_b = &gh_s[b * 3 * hid..(b + 1) * 3 * hid];
                for k in 0..hid {
                    let j = b * hid + k;
                    let r = sigmoid(gi_b[k] + gh_b[k]);
                    let z = sigmoid(gi_b[hid + k] + gh_b[hid + k]);
                    let ghn = gh_b[2 * hid + k];
                    let n = (gi_b[2 * hid + k] + r * ghn).tanh();
                    let hp = h_s[j];
                    h_s[j] = (1.0 - z) * n + z * hp;
                    r_t[j] = r;
                    z_t[j] = z;
                    n_t[j] = n;
                    ghn_t[j] = ghn;
                }
            }
            out.index_axis_mut(Axis(0), t).assign(&h);
        }
        let cache = GruCache {
            x: xf,
            h_prev,
            r: r_all,
            z: z_all,
            n: n_all,
            gh_n: ghn_all,
        };
        Ok((out, cache))
    }

    /// Backpropagation through time. `dh` is the loss gradient with respect to
    /// every output state `(T, B, H)`. Returns parameter gradients, the
    /// gradient with respect to the input sequence and to `h0`.
    pub fn backward(
        &self,
        cache: &GruCache,
        dh: ArrayView3<'_, f64>,
    ) -> Result<(Gru, Array3<f64>, Array2<f64>), NnError> {
        let (t_len, batch, hid) = cache.r.dim();
        if dh.dim() != (t_len, batch, hid) || hid != self.hidden_size() {
            return shape_err(format!(
                "GRU backward expects gradient {:?}, got {:?}",
                (t_len, batch, hid),
                dh.dim()
            ));
        }
        let mut d_gi = Array2::zeros((t_len * batch, 3 * hid));
        let mut d_gh = Array2::zeros((t_len * batch, 3 * hid));
        let mut carry = Array2::<f64>::zeros((batch, hid));
        let dh = dh.as_standard_layout();
        let dh_all = dh.as_slice().expect("contiguous");
        let (r_all, z_all, n_all, hp_all, ghn_all) = (
            cache.r.as_slice().expect("contiguous"),
            cache.z.as_slice().expect("contiguous"),
            cache.n.as_slice().expect("contiguous"),
            cache.h_prev.as_slice().expect("contiguous"),
            cache.gh_n.as_slice().expect("contiguous"),
        );
        let step = batch * hid;
        let gates = batch * 3 * hid;
        for t in (0..t_len).rev() {
            let row0 = t * batch;
            {
                let d_gi_t = &mut d_gi.as_slice_mut().expect("contiguous")[t * gates..(t + 1) * gates];
                let d_gh_t = &mut d_gh.as_slice_mut().expect("contiguous")[t * gates..(t + 1) * gates];
                let c_s = carry.as_slice_mut().expect("contiguous");
                for b in 0..batch {
                    for k in 0..hid {
                        let j = b * hid + k;
                        let c = t * step + j;
                        let g = dh_all[c] + c_s[j];
                        let (r, z, n, hp) = (r_all[c], z_all[c], n_all[c], hp_all[c]);
                        let dan = g * (1.0 - z) * (1.0 - n * n);
                        let dz = g * (hp - n);
                        let dr = dan * ghn_all[c];
                        let dar = dr * r * (1.0 - r);
                        let daz = dz * z * (1.0 - z);
                        let o = b * 3 * hid + k;
                        d_gi_t[o] = dar;
                        d_gi_t[o + hid] = daz;
                        d_gi_t[o + 2 * hid] = dan;
                        d_gh_t[o] = dar;
                        d_gh_t[o + hid] = daz;
                        d_gh_t[o + 2 * hid] = dan * r;
                        c_s[j] = g * z;
                    }
                }
            }
            let d_gh_t = d_gh.slice(s![row0..row0 + batch, ..]);
            general_mat_mul(1.0, &d_gh_t, &self.u, 1.0, &mut carry);
        }
        let h_prev = cache
            .h_prev
            .view()
            .into_shape_with_order((t_len * batch, hid))
            .expect("contiguous");
        let grads = Gru {
            w: d_gi.t().dot(&cache.x),
            u: d_gh.t().dot(&h_prev),
            b_i: d_gi.sum_axis(Axis(0)),
            b_h: d_gh.sum_axis(Axis(0)),
        };
        let dx = d_gi
            .dot(&self.w)
            .into_shape_with_order((t_len, batch, self.input_size()))
            .expect("contiguous");
        Ok((grads, dx, carry))
    }
}

impl Params for Gru {
    fn param_slices(&self) -> Vec<&[f64]> {
        vec![slice_of(&self.w), slice_of(&self.u), slice_of(&self.b_i), slice_of(&self.b_h)]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            slice_of_mut(&mut self.w),
            slice_of_mut(&mut self.u),
            slice_of_mut(&mut self.b_i),
            slice_of_mut(&mut self.b_h),
        ]
    }

    fn shapes(&self) -> Vec<Vec<usize>> {
        vec![
            self.w.shape().to_vec(),
            self.u.shape().to_vec(),
            self.b_i.shape().to_vec(),
            self.b_h.shape().to_vec(),
        ]
    }
}
