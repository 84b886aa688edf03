use crate::Params;

/// Adam with bias correction (β₁ = 0.9, β₂ = 0.999, ε = 1e-8 by default).
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Default for Adam {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }
}

impl Adam {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One update of `params` along `grads` (same type, same shapes).
    pub fn step<P: Params>(&mut self, params: &mut P, grads: &P, lr: f64) {
        let gs = grads.param_slices();
        if self.m.is_empty() {
            self.m = gs.iter().map(|g| vec![0.0; g.len()]).collect();
            self.v = self.m.clone();
        }
        assert_eq!(gs.len(), self.m.len(), "optimizer state does not match parameters");
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for (((p, g), m), v) in params
            .param_slices_mut()
            .into_iter()
            .zip(gs)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            assert_eq!(p.len(), g.len(), "gradient shape does not match parameter");
            for k in 0..p.len() {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
                let mh = m[k] / bc1;
                let vh = v[k] / bc2;
                p[k] -= lr * mh / (vh.sqrt() + self.eps);
            }
        }
    }
}

/// Halves (by default) the learning rate when validation loss stops
/// improving by more than `threshold` for `patience` epochs.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauScheduler {
    pub factor: f64,
    pub patience: usize,
    pub threshold: f64,
    pub min_lr: f64,
    best: f64,
    bad_epochs: usize,
}

impl Default for PlateauScheduler {
    fn default() -> Self {
        Self::new(0.5, 10)
    }
}

impl PlateauScheduler {
    pub fn new(factor: f64, patience: usize) -> Self {
        Self {
            factor,
            patience,
            threshold: 1e-4,
            min_lr: 1e-6,
            best: f64::INFINITY,
            bad_epochs: 0,
        }
    }

    /// Records one epoch's validation loss and returns the learning rate to
    /// use next.
    pub fn step(&mut self, lr: f64, val_loss: f64) -> f64 {
        if val_loss < self.best - self.threshold {
            self.best = val_loss;
            self.bad_epochs = 0;
            return lr;
        }
        self.bad_epochs += 1;
        if self.bad_epochs >= self.patience {
            self.bad_epochs = 0;
            return (lr * self.factor).max(self.min_lr.min(lr));
        }
        lr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    /// Stop; `best_epoch` is the epoch whose parameters were kept.
    Stop { best_epoch: usize },
}

/// Stops training once validation loss has not improved for `patience`
/// consecutive epochs and keeps a copy of the best model seen.
#[derive(Debug, Clone)]
pub struct EarlyStopping<M> {
    pub patience: usize,
    best_loss: f64,
    best_epoch: usize,
    bad_epochs: usize,
    best: Option<M>,
}

impl<M: Clone> EarlyStopping<M> {
    pub fn new(patience: usize) -> Self {
        assert!(patience >= 1, "patience must be at least 1");
        Self {
            patience,
            best_loss: f64::INFINITY,
            best_epoch: 0,
            bad_epochs: 0,
            best: None,
        }
    }

    /// Epochs are numbered by the caller, conventionally from 1.
    pub fn update(&mut self, epoch: usize, val_loss: f64, model: &M) -> StopDecision {
        if val_loss < self.best_loss {
            self.best_loss = val_loss;
            self.best_epoch = epoch;
            self.bad_epochs = 0;
            self.best = Some(model.clone());
            return StopDecision::Continue;
        }
        self.bad_epochs += 1;
        if self.bad_epochs >= self.patience {
            StopDecision::Stop {
                best_epoch: self.best_epoch,
            }
        } else {
            StopDecision::Continue
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best_loss
    }

    pub fn best_model(&self) -> Option<&M> {
        self.best.as_ref()
    }

    pub fn into_best(self) -> Option<M> {
        self.best
    }
}
