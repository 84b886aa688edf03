use std::path::Path;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use gaitforge_core::Activity;
use gaitforge_nn::{read_checkpoint, write_checkpoint, Adam, EarlyStopping, GruClassifier, Params, StopDecision, TrainConfig};

use crate::batch::stack_time_major;
use crate::io::{read_bytes, read_json, write_bytes, write_json};
use crate::metrics::argmax_first;
use crate::{class_weights, ClassMetrics, ClassWindow, Modality, PipelineError, Result, Standardizer, WeightedSampler};

const PREDICT_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub hidden: usize,
    pub train: TrainConfig,
    /// Windows drawn by the weighted sampler per epoch; defaults to the
    /// number of training windows.
    pub samples_per_epoch: Option<usize>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self::for_modality(Modality::Pose)
    }
}

impl ClassifierConfig {
    /// GRU of 16 units, lr 0.003, batch 64, early stopping after 5 epochs
    /// without validation improvement; 80 epochs for pose, 100 for insole.
    pub fn for_modality(modality: Modality) -> Self {
        Self {
            hidden: 16,
            train: TrainConfig {
                learning_rate: 0.003,
                batch_size: 64,
                max_epochs: match modality {
                    Modality::Pose => 80,
                    Modality::Insole => 100,
                },
                early_stop_patience: 5,
                plateau_patience: 0,
                dropout: 0.0,
                ..TrainConfig::default()
            },
            samples_per_epoch: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(PipelineError::Config("hidden size must be positive".into()));
        }
        self.train.validate().map_err(|e| PipelineError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Epoch whose parameters were kept (the last one without validation).
    pub best_epoch: usize,
    pub history: Vec<EpochLog>,
}

impl TrainReport {
    pub fn final_train_loss(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |e| e.train_loss)
    }
}

/// A trained single-modality GRU classifier with its input normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub modality: Modality,
    pub net: GruClassifier,
    pub standardizer: Standardizer,
    pub config: ClassifierConfig,
    pub report: TrainReport,
}

#[derive(Serialize, Deserialize)]
struct ClassifierMeta {
    modality: Modality,
    input: usize,
    hidden: usize,
    classes: usize,
    standardizer: Standardizer,
    config: ClassifierConfig,
    report: TrainReport,
}

fn check_windows(windows: &[ClassWindow], modality: Modality) -> Result<()> {
    let want = (modality.window(), modality.features());
    for w in windows {
        if w.modality != modality || w.features.dim() != want {
            return Err(PipelineError::Data(format!(
                "window of trial {} is {} {:?}, expected {modality} {want:?}",
                w.trial_id,
                w.modality,
                w.features.dim()
            )));
        }
    }
    Ok(())
}

fn labels(windows: &[ClassWindow]) -> Vec<usize> {
    windows.iter().map(|w| w.label.index()).collect()
}

impl TrainedClassifier {
    fn prepare(&self, windows: &[&ClassWindow]) -> Vec<Array2<f64>> {
        windows.iter().map(|w| self.standardizer.apply(w.features.view())).collect()
    }

    /// Class probabilities per window, in [`Activity::ALL`] order.
    pub fn predict_proba(&self, windows: &[&ClassWindow]) -> Result<Vec<[f64; Activity::COUNT]>> {
        let mut out = Vec::with_capacity(windows.len());
        for chunk in windows.chunks(PREDICT_CHUNK) {
            let xs = self.prepare(chunk);
            let refs: Vec<&Array2<f64>> = xs.iter().collect();
            let probs = self.net.predict_proba(stack_time_major(&refs).view())?;
            for row in probs.rows() {
                out.push(std::array::from_fn(|c| row[c]));
            }
        }
        Ok(out)
    }

    pub fn predict(&self, windows: &[&ClassWindow]) -> Result<Vec<Activity>> {
        Ok(self
            .predict_proba(windows)?
            .iter()
            .map(|p| Activity::ALL[argmax_first(p.iter().copied())])
            .collect())
    }

    pub fn evaluate(&self, windows: &[ClassWindow]) -> Result<ClassMetrics> {
        let refs: Vec<&ClassWindow> = windows.iter().collect();
        let pred = self.predict(&refs)?;
        let truth: Vec<Activity> = windows.iter().map(|w| w.label).collect();
        Ok(ClassMetrics::from_predictions(&truth, &pred))
    }

    fn checkpoint_kind(&self) -> String {
        format!("gru-classifier-{}", self.modality)
    }

    /// Writes `<modality>_classifier.gfnn` and `<modality>_classifier.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let stem = format!("{}_classifier", self.modality);
        write_bytes(&dir.join(format!("{stem}.gfnn")), &write_checkpoint(&self.checkpoint_kind(), &self.net))?;
        let meta = ClassifierMeta {
            modality: self.modality,
            input: self.net.gru.input_size(),
            hidden: self.net.gru.hidden_size(),
            classes: self.net.classes(),
            standardizer: self.standardizer.clone(),
            config: self.config.clone(),
            report: self.report.clone(),
        };
        write_json(&dir.join(format!("{stem}.json")), &meta)
    }

    pub fn load(dir: &Path, modality: Modality) -> Result<Self> {
        let stem = format!("{modality}_classifier");
        let meta: ClassifierMeta = read_json(&dir.join(format!("{stem}.json")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = GruClassifier::new(meta.input, meta.hidden, meta.classes, &mut rng);
        let path = dir.join(format!("{stem}.gfnn"));
        let ckpt = read_checkpoint(&read_bytes(&path)?).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
        ckpt.load_into(&mut net).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
        let out = Self {
            modality: meta.modality,
            net,
            standardizer: meta.standardizer,
            config: meta.config,
            report: meta.report,
        };
        if out.modality != modality || ckpt.kind != out.checkpoint_kind() {
            return Err(PipelineError::Data(format!("{}: not a {modality} classifier", path.display())));
        }
        Ok(out)
    }
}

fn mean_loss(
    net: &GruClassifier,
    xs: &[Array2<f64>],
    ys: &[usize],
    weights: &[f64],
) -> Result<(f64, f64)> {
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (cx, cy) in xs.chunks(PREDICT_CHUNK).zip(ys.chunks(PREDICT_CHUNK)) {
        let refs: Vec<&Array2<f64>> = cx.iter().collect();
        let x = stack_time_major(&refs);
        let logits = net.logits(x.view())?;
        let (l, _) = gaitforge_nn::weighted_cross_entropy(logits.view(), cy, weights)?;
        loss += l * cy.len() as f64;
        for (row, &y) in logits.rows().into_iter().zip(cy) {
            correct += (argmax_first(row.iter().copied()) == y) as usize;
        }
    }
    let n = ys.len().max(1) as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Trains a GRU classifier on windows of one modality. Each epoch draws
/// windows with a class-balancing weighted sampler and minimizes
/// class-weighted cross-entropy with Adam. With a non-empty validation set,
/// training stops once validation loss has not improved for
/// `early_stop_patience` epochs and the best parameters are kept.
/// Deterministic for a given seed.
pub fn train_classifier(
    train: &[ClassWindow],
    val: &[ClassWindow],
    modality: Modality,
    config: &ClassifierConfig,
) -> Result<TrainedClassifier> {
    config.validate()?;
    if train.is_empty() {
        return Err(PipelineError::Data("no training windows".into()));
    }
    check_windows(train, modality)?;
    check_windows(val, modality)?;
    let tc = &config.train;
    let train_labels = labels(train);
    let weights = class_weights(&train_labels, Activity::COUNT)?;
    let sampler = WeightedSampler::from_labels(&train_labels)?;
    let standardizer = Standardizer::fit(train.iter().map(|w| w.features.view()), modality.features());
    let xs: Vec<Array2<f64>> = train.iter().map(|w| standardizer.apply(w.features.view())).collect();
    let val_xs: Vec<Array2<f64>> = val.iter().map(|w| standardizer.apply(w.features.view())).collect();
    let val_labels = labels(val);
    let uniform = vec![1.0; Activity::COUNT];

    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut net = GruClassifier::new(modality.features(), config.hidden, Activity::COUNT, &mut rng);
    let mut adam = Adam::new();
    let mut stopper = (tc.early_stop_patience > 0 && !val.is_empty()).then(|| EarlyStopping::new(tc.early_stop_patience));
    let per_epoch = config.samples_per_epoch.unwrap_or(train.len());
    let mut history = Vec::new();
    let mut best_epoch = 0;

    for epoch in 1..=tc.max_epochs {
        let order = sampler.draw(per_epoch, &mut rng);
        let mut total = 0.0;
        for batch in order.chunks(tc.batch_size) {
            let refs: Vec<&Array2<f64>> = batch.iter().map(|&i| &xs[i]).collect();
            let ys: Vec<usize> = batch.iter().map(|&i| train_labels[i]).collect();
            let (loss, grads) = net.loss_and_grad(stack_time_major(&refs).view(), &ys, &weights)?;
            adam.step(&mut net, &grads, tc.learning_rate);
            total += loss * batch.len() as f64;
        }
        let train_loss = total / per_epoch.max(1) as f64;
        if !net.all_finite() {
            return Err(PipelineError::Data(format!("{modality} classifier diverged at epoch {epoch}")));
        }
        let (val_loss, val_accuracy) = if val.is_empty() {
            (None, None)
        } else {
            let (l, a) = mean_loss(&net, &val_xs, &val_labels, &uniform)?;
            (Some(l), Some(a))
        };
        history.push(EpochLog {
            epoch,
            train_loss,
            val_loss,
            val_accuracy,
        });
        log::debug!("{modality} epoch {epoch}: train {train_loss:.4} val {val_loss:?} acc {val_accuracy:?}");
        best_epoch = epoch;
        if let (Some(s), Some(vl)) = (stopper.as_mut(), val_loss) {
            if let StopDecision::Stop { .. } = s.update(epoch, vl, &net) {
                break;
            }
        }
    }
    let epochs_run = history.len();
    if let Some(s) = stopper {
        best_epoch = s.best_epoch();
        if let Some(best) = s.into_best() {
            net = best;
        }
    }
    Ok(TrainedClassifier {
        modality,
        net,
        standardizer,
        config: config.clone(),
        report: TrainReport {
            epochs_run,
            best_epoch,
            history,
        },
    })
}
