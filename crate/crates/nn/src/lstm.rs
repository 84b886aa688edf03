use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Array3, ArrayView2, ArrayView3, Axis};
use rand::Rng;
use rand::distr::{Distribution, Uniform};

use crate::params::{slice_of, slice_of_mut};
use crate::{shape_err, sigmoid, NnError, Params};

/// Long short-term memory layer.
///
/// Gate blocks are stacked in the order `[i; f; g; o]`:
///
/// ```text
/// i, f, o = σ(W x + U h + b)
/// g       = tanh(W_g x + U_g h + b_g)
/// c'      = f ⊙ c + i ⊙ g
/// h'      = o ⊙ tanh(c')
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    /// Input weights, `4H × I`.
    pub w: Array2<f64>,
    /// Recurrent weights, `4H × H`.
    pub u: Array2<f64>,
    pub b: Array1<f64>,
}

/// Parameter gradients plus gradients for the input, `h0` and `c0`.
pub type LstmGrads = (Lstm, Array3<f64>, Array2<f64>, Array2<f64>);

#[derive(Debug, Clone)]
pub struct LstmCache {
    x: Array2<f64>,
    h_prev: Array3<f64>,
    c_prev: Array3<f64>,
    /// Post-activation gates, `(T, B, 4H)`.
    gates: Array3<f64>,
    tanh_c: Array3<f64>,
}

impl Lstm {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w: Array2::zeros((4 * hidden, input)),
            u: Array2::zeros((4 * hidden, hidden)),
            b: Array1::zeros(4 * hidden),
        }
    }

    /// Uniform(−1/√H, 1/√H) initialization.
    pub fn new(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut l = Self::zeros(input, hidden);
        let k = 1.0 / (hidden as f64).sqrt();
        let dist = Uniform::new_inclusive(-k, k).expect("valid bounds");
        for s in l.param_slices_mut() {
            for v in s {
                *v = dist.sample(rng);
            }
        }
        l
    }

    pub fn input_size(&self) -> usize {
        self.w.ncols()
    }

    pub fn hidden_size(&self) -> usize {
        self.u.ncols()
    }

    /// Runs the layer over `x` of shape `(T, B, I)`; missing initial states
    /// are zero. Returns all hidden states `(T, B, H)`.
    pub fn forward(
        &self,
        x: ArrayView3<'_, f64>,
        h0: Option<ArrayView2<'_, f64>>,
        c0: Option<ArrayView2<'_, f64>>,
    ) -> Result<(Array3<f64>, LstmCache), NnError> {
        let (t_len, batch, input) = x.dim();
        let hid = self.hidden_size();
        if input != self.input_size() {
            return shape_err(format!("LSTM expects {} inputs, got {input}", self.input_size()));
        }
        let init = |s: Option<ArrayView2<'_, f64>>, name: &str| match s {
            Some(v) if v.dim() != (batch, hid) => {
                shape_err(format!("{name} must be ({batch}, {hid}), got {:?}", v.dim()))
            }
            Some(v) => Ok(v.as_standard_layout().into_owned()),
            None => Ok(Array2::zeros((batch, hid))),
        };
        let mut h = init(h0, "h0")?;
        let mut c = init(c0, "c0")?;
        let xf = x
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((t_len * batch, input))
            .expect("contiguous");
        let mut gx = xf.dot(&self.w.t());
        gx += &self.b;

        let mut out = Array3::zeros((t_len, batch, hid));
        let mut h_prev = Array3::zeros((t_len, batch, hid));
        let mut c_prev = Array3::zeros((t_len, batch, hid));
        let mut gates = Array3::zeros((t_len, batch, 4 * hid));
        let mut tanh_c = Array3::zeros((t_len, batch, hid));
        let mut a = Array2::zeros((batch, 4 * hid));
        for t in 0..t_len {
            h_prev.index_axis_mut(Axis(0), t).assign(&h);
            c_prev.index_axis_mut(Axis(0), t).assign(&c);
            a.assign(&gx.slice(s![t * batch..(t + 1) * batch, ..]));
            general_mat_mul(1.0, &h, &self.u.t(), 1.0, &mut a);
            let a_s = a.as_slice().expect("contiguous");
            let (h_s, c_s) = (h.as_slice_mut().expect("contiguous"), c.as_slice_mut().expect("contiguous"));
            let g_t = &mut gates.as_slice_mut().expect("contiguous")[t * batch * 4 * hid..(t + 1) * batch * 4 * hid];
            let tc_t = &mut tanh_c.as_slice_mut().expect("contiguous")[t * batch * hid..(t + 1) * batch * hid];
            for b in 0..batch {
                let a_b = &a_s[b * 4 * hid..(b + 1) * 4 * hid];
                let g_b = &mut g_t[b * 4 * hid..(b + 1) * 4 * hid];
                for k in 0..hid {
                    let j = b * hid + k;
                    let i = sigmoid(a_b[k]);
                    let f = sigmoid(a_b[hid + k]);
                    let g = a_b[2 * hid + k].tanh();
                    let o = sigmoid(a_b[3 * hid + k]);
                    let cn = f * c_s[j] + i * g;
                    let tc = cn.tanh();
                    c_s[j] = cn;
                    h_s[j] = o * tc;
                    g_b[k] = i;
                    g_b[hid + k] = f;
                    g_b[2 * hid + k] = g;
                    g_b[3 * hid + k] = o;
                    tc_t[j] = tc;
                }
            }
            out.index_axis_mut(Axis(0), t).assign(&h);
        }
        let cache = LstmCache {
            x: xf,
            h_prev,
            c_prev,
            gates,
            tanh_c,
        };
        Ok((out, cache))
    }

    /// Backpropagation through time from gradients on every output state.
    /// Returns parameter gradients, input gradients `(T, B, I)` and the
    /// gradients with respect to `h0` and `c0`.
    pub fn backward(
        &self,
        cache: &LstmCache,
        dh: ArrayView3<'_, f64>,
    ) -> Result<LstmGrads, NnError> {
        let (t_len, batch, hid) = cache.tanh_c.dim();
        if dh.dim() != (t_len, batch, hid) || hid != self.hidden_size() {
            return shape_err(format!(
                "LSTM backward expects gradient {:?}, got {:?}",
                (t_len, batch, hid),
                dh.dim()
            ));
        }
        let mut d_a = Array2::zeros((t_len * batch, 4 * hid));
        let mut dh_carry = Array2::<f64>::zeros((batch, hid));
        let mut dc_carry = Array2::<f64>::zeros((batch, hid));
        let dh = dh.as_standard_layout();
        let dh_all = dh.as_slice().expect("contiguous");
        let gates = cache.gates.as_slice().expect("contiguous");
        let tanh_c = cache.tanh_c.as_slice().expect("contiguous");
        let c_prev = cache.c_prev.as_slice().expect("contiguous");
        let (step, wide) = (batch * hid, batch * 4 * hid);
        for t in (0..t_len).rev() {
            let row0 = t * batch;
            {
                let d_a_t = &mut d_a.as_slice_mut().expect("contiguous")[t * wide..(t + 1) * wide];
                let dhc = dh_carry.as_slice().expect("contiguous");
                let dcc = dc_carry.as_slice_mut().expect("contiguous");
                for b in 0..batch {
                    let g_b = &gates[t * wide + b * 4 * hid..t * wide + (b + 1) * 4 * hid];
                    let d_b = &mut d_a_t[b * 4 * hid..(b + 1) * 4 * hid];
                    for k in 0..hid {
                        let j = b * hid + k;
                        let cell = t * step + j;
                        let gh = dh_all[cell] + dhc[j];
                        let (i, f, g, o) = (g_b[k], g_b[hid + k], g_b[2 * hid + k], g_b[3 * hid + k]);
                        let tc = tanh_c[cell];
                        let dc = dcc[j] + gh * o * (1.0 - tc * tc);
                        d_b[k] = dc * g * i * (1.0 - i);
                        d_b[hid + k] = dc * c_prev[cell] * f * (1.0 - f);
                        d_b[2 * hid + k] = dc * i * (1.0 - g * g);
                        d_b[3 * hid + k] = gh * tc * o * (1.0 - o);
                        dcc[j] = dc * f;
                    }
                }
            }
            let d_a_t = d_a.slice(s![row0..row0 + batch, ..]);
            general_mat_mul(1.0, &d_a_t, &self.u, 0.0, &mut dh_carry);
        }
        let h_prev = cache
            .h_prev
            .view()
            .into_shape_with_order((t_len * batch, hid))
            .expect("contiguous");
        let grads = Lstm {
            w: d_a.t().dot(&cache.x),
            u: d_a.t().dot(&h_prev),
            b: d_a.sum_axis(Axis(0)),
        };
        let dx = d_a
            .dot(&self.w)
            .into_shape_with_order((t_len, batch, self.input_size()))
            .expect("contiguous");
        Ok((grads, dx, dh_carry, dc_carry))
    }
}

impl Params for Lstm {
    fn param_slices(&self) -> Vec<&[f64]> {
        vec![slice_of(&self.w), slice_of(&self.u), slice_of(&self.b)]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![slice_of_mut(&mut self.w), slice_of_mut(&mut self.u), slice_of_mut(&mut self.b)]
    }

    fn shapes(&self) -> Vec<Vec<usize>> {
        vec![self.w.shape().to_vec(), self.u.shape().to_vec(), self.b.shape().to_vec()]
    }
}
