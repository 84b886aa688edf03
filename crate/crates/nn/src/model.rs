use ndarray::{Array2, Array3, ArrayView2, ArrayView3, Axis};
use rand::Rng;

use crate::{
    dropout_apply, mae_loss, shape_err, softmax_rows, weighted_cross_entropy, Activation, Dense, Gru, Lstm, NnError,
    Params,
};

/// Sequence classifier: a GRU whose final hidden state feeds a linear layer
/// producing class logits. Probabilities are the softmax of the logits.
#[derive(Debug, Clone, PartialEq)]
pub struct GruClassifier {
    pub gru: Gru,
    pub head: Dense,
}

impl GruClassifier {
    pub fn new(input: usize, hidden: usize, classes: usize, rng: &mut impl Rng) -> Self {
        Self {
            gru: Gru::new(input, hidden, rng),
            head: Dense::new(hidden, classes, Activation::Linear, rng),
        }
    }

    pub fn classes(&self) -> usize {
        self.head.output_size()
    }

    /// Logits `(B, C)` for sequences `(T, B, I)`.
    pub fn logits(&self, x: ArrayView3<'_, f64>) -> Result<Array2<f64>, NnError> {
        let (h, _) = self.gru.forward(x, None)?;
        let last = h.index_axis(Axis(0), h.dim().0 - 1).to_owned();
        Ok(self.head.forward(last.view())?.0)
    }

    pub fn predict_proba(&self, x: ArrayView3<'_, f64>) -> Result<Array2<f64>, NnError> {
        Ok(softmax_rows(self.logits(x)?.view()))
    }

    /// Weighted cross-entropy loss and parameter gradients for one batch.
    pub fn loss_and_grad(
        &self,
        x: ArrayView3<'_, f64>,
        targets: &[usize],
        class_weights: &[f64],
    ) -> Result<(f64, GruClassifier), NnError> {
        let t_len = x.dim().0;
        if t_len == 0 {
            return shape_err("empty sequence");
        }
        let (h, gru_cache) = self.gru.forward(x, None)?;
        let last = h.index_axis(Axis(0), t_len - 1).to_owned();
        let (logits, head_cache) = self.head.forward(last.view())?;
        let (loss, dlogits) = weighted_cross_entropy(logits.view(), targets, class_weights)?;
        let (head_grad, dlast) = self.head.backward(&head_cache, dlogits.view())?;
        let mut dh = Array3::zeros(h.dim());
        dh.index_axis_mut(Axis(0), t_len - 1).assign(&dlast);
        let (gru_grad, _, _) = self.gru.backward(&gru_cache, dh.view())?;
        Ok((
            loss,
            GruClassifier {
                gru: gru_grad,
                head: head_grad,
            },
        ))
    }
}

impl Params for GruClassifier {
    fn param_slices(&self) -> Vec<&[f64]> {
        let mut v = self.gru.param_slices();
        v.extend(self.head.param_slices());
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.gru.param_slices_mut();
        v.extend(self.head.param_slices_mut());
        v
    }

    fn shapes(&self) -> Vec<Vec<usize>> {
        let mut v = self.gru.shapes();
        v.extend(self.head.shapes());
        v
    }
}

/// Sequence-to-sequence regressor: LSTM, dropout, a ReLU dense layer and a
/// linear output emitting one value per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmRegressor {
    pub lstm: Lstm,
    pub hidden: Dense,
    pub out: Dense,
    pub dropout: f64,
}

impl LstmRegressor {
    pub fn new(input: usize, hidden: usize, dense: usize, dropout: f64, rng: &mut impl Rng) -> Self {
        Self {
            lstm: Lstm::new(input, hidden, rng),
            hidden: Dense::new(hidden, dense, Activation::Relu, rng),
            out: Dense::new(dense, 1, Activation::Linear, rng),
            dropout,
        }
    }

    pub fn input_size(&self) -> usize {
        self.lstm.input_size()
    }

    /// Predictions `(B, T)` for inputs `(T, B, I)`, without dropout.
    pub fn predict(&self, x: ArrayView3<'_, f64>) -> Result<Array2<f64>, NnError> {
        let (t_len, batch, _) = x.dim();
        let (h, _) = self.lstm.forward(x, None, None)?;
        let flat = h.into_shape_with_order((t_len * batch, self.lstm.hidden_size())).expect("contiguous");
        let (a, _) = self.hidden.forward(flat.view())?;
        let (y, _) = self.out.forward(a.view())?;
        Ok(y.into_shape_with_order((t_len, batch)).expect("contiguous").reversed_axes().as_standard_layout().into_owned())
    }

    /// Mean absolute error over every (sample, step) and parameter gradients.
    /// Dropout is active when `rng` is given.
    pub fn loss_and_grad<R: Rng>(
        &self,
        x: ArrayView3<'_, f64>,
        target: ArrayView2<'_, f64>,
        rng: Option<&mut R>,
    ) -> Result<(f64, LstmRegressor), NnError> {
        let (t_len, batch, _) = x.dim();
        if target.dim() != (batch, t_len) {
            return shape_err(format!("target must be {:?}, got {:?}", (batch, t_len), target.dim()));
        }
        let hid = self.lstm.hidden_size();
        let (h, lstm_cache) = self.lstm.forward(x, None, None)?;
        let flat = h.into_shape_with_order((t_len * batch, hid)).expect("contiguous");
        let (dropped, mask) = match rng {
            Some(rng) => dropout_apply(flat.view(), self.dropout, rng, true),
            None => (flat, None),
        };
        let (a, hidden_cache) = self.hidden.forward(dropped.view())?;
        let (y, out_cache) = self.out.forward(a.view())?;
        // Rows of `y` are time-major: row t·B + b is sample b at step t.
        let target_tm = target.t().as_standard_layout().into_owned();
        let (loss, grad) = mae_loss(
            y.as_slice().expect("contiguous"),
            target_tm.as_slice().expect("contiguous"),
        )?;
        let dy = Array2::from_shape_vec((t_len * batch, 1), grad).expect("sized");
        let (out_grad, da) = self.out.backward(&out_cache, dy.view())?;
        let (hidden_grad, mut dflat) = self.hidden.backward(&hidden_cache, da.view())?;
        if let Some(mask) = mask {
            dflat *= &mask;
        }
        let dh = dflat.into_shape_with_order((t_len, batch, hid)).expect("contiguous");
        let (lstm_grad, _, _, _) = self.lstm.backward(&lstm_cache, dh.view())?;
        Ok((
            loss,
            LstmRegressor {
                lstm: lstm_grad,
                hidden: hidden_grad,
                out: out_grad,
                dropout: self.dropout,
            },
        ))
    }
}

impl Params for LstmRegressor {
    fn param_slices(&self) -> Vec<&[f64]> {
        let mut v = self.lstm.param_slices();
        v.extend(self.hidden.param_slices());
        v.extend(self.out.param_slices());
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.lstm.param_slices_mut();
        v.extend(self.hidden.param_slices_mut());
        v.extend(self.out.param_slices_mut());
        v
    }

    fn shapes(&self) -> Vec<Vec<usize>> {
        let mut v = self.lstm.shapes();
        v.extend(self.hidden.shapes());
        v.extend(self.out.shapes());
        v
    }
}
