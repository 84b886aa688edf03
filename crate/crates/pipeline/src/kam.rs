use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use gaitforge_core::{channel_index, kam_to_pct_bwht, Activity, Axis, KeypointId, PoseStream, Sensor, Subject};
use gaitforge_dsp::{detect_sit_stand, detect_strides, interp_linear, knee_angle, StrideConfig, STRIDE_POINTS};
use gaitforge_nn::{
    read_checkpoint, write_checkpoint, Adam, EarlyStopping, LstmRegressor, Params, PlateauScheduler, StopDecision,
    TrainConfig,
};

use crate::batch::stack_time_major;
use crate::io::{read_bytes, read_json, write_bytes, write_json};
use crate::metrics::{pearson_r, KamMetrics, MeanStd, StrideRow};
use crate::{PipelineError, Result, Standardizer, SyncedTrial};

/// Five sensors × (Fx, Fy, Fz).
pub const FORCE_CHANNELS: usize = 15;
/// Strides whose insole and mocap vertical forces correlate below this are
/// flagged as misaligned.
pub const ALIGNMENT_MIN_R: f64 = 0.98;

/// One time-normalized stride (or sit/stand transition).
#[derive(Debug, Clone, PartialEq)]
pub struct StrideSample {
    /// `(101, 15)` force channels, sensor-major, optionally followed by the
    /// knee angle as a 16th column.
    pub inputs: Array2<f64>,
    /// KAM in N·m at the same 101 points.
    pub target: Vec<f64>,
    pub activity: Activity,
    pub trial_id: String,
    pub subject_id: String,
    /// Index of the stride within its trial.
    pub stride: usize,
    /// Lab-clock start and end, µs.
    pub start_us: f64,
    pub end_us: f64,
    /// Correlation of insole total and mocap vertical force over the stride.
    pub force_agreement: Option<f64>,
}

impl StrideSample {
    pub fn channels(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn has_knee_angle(&self) -> bool {
        self.channels() == FORCE_CHANNELS + 1
    }

    /// False when the two force measurements disagree, which happens when
    /// the streams are not synchronized.
    pub fn is_aligned(&self) -> bool {
        self.force_agreement.is_some_and(|r| r >= ALIGNMENT_MIN_R)
    }
}

/// Right knee flexion from the pose stream (x, y only), one value per frame.
pub fn pose_knee_angles(pose: &PoseStream) -> Result<Vec<f64>> {
    pose.frames()
        .iter()
        .map(|f| {
            let xy = |id| {
                let k = f.get(id);
                [k.x, k.y]
            };
            knee_angle(&xy(KeypointId::RightHip), &xy(KeypointId::RightKnee), &xy(KeypointId::RightAnkle))
                .map_err(|e| PipelineError::dsp(format!("pose frame at {} µs", f.t_us), e))
        })
        .collect()
}

fn grid(a: f64, b: f64) -> Vec<f64> {
    let n = STRIDE_POINTS - 1;
    (0..STRIDE_POINTS).map(|j| a + (b - a) * j as f64 / n as f64).collect()
}

fn stream_rate(times: &[f64]) -> Option<f64> {
    let n = times.len();
    (n > 1 && times[n - 1] > times[0]).then(|| (n - 1) as f64 * 1e6 / (times[n - 1] - times[0]))
}

/// Cuts a synchronized trial into time-normalized stride samples.
///
/// Walking and running strides run from one right-foot contact (insole total
/// vertical force rising through 20 N) to the next. A sit-to-stand or
/// stand-to-sit trial yields its single transition, found on the pose knee
/// angle. Inputs, the knee angle and the mocap KAM target are all linearly
/// interpolated to 101 points spanning the stride on the lab clock; strides
/// not fully covered by every stream are dropped.
pub fn extract_kam_samples(st: &SyncedTrial, with_knee_angle: bool) -> Result<Vec<StrideSample>> {
    let t = &st.trial;
    let missing = |what: &str| PipelineError::Data(format!("trial {}: no {what} stream", t.id));
    let insole = t.insole.as_ref().ok_or_else(|| missing("insole"))?;
    let mocap = t.mocap.as_ref().ok_or_else(|| missing("mocap"))?;
    let ins_t: Vec<f64> = insole.times_us().iter().map(|&x| st.insole_to_lab(x) as f64).collect();
    let mocap_t: Vec<f64> = mocap.times_us().iter().map(|&x| x as f64).collect();
    let needs_pose = with_knee_angle || t.activity.is_sit_stand();
    let knee = if needs_pose {
        let pose = t.pose.as_ref().ok_or_else(|| missing("pose"))?;
        let times: Vec<f64> = pose.times_us().iter().map(|&x| x as f64).collect();
        Some((times, pose_knee_angles(pose).map_err(|e| PipelineError::Data(format!("trial {}: {e}", t.id)))?))
    } else {
        None
    };

    let spans: Vec<(f64, f64)> = match t.activity {
        Activity::Walk | Activity::Run => {
            let force = insole.total_vertical_force();
            let rate = stream_rate(&ins_t).unwrap_or(insole.sample_rate() as f64);
            detect_strides(&force, rate, &StrideConfig::default())
                .into_iter()
                .filter(|s| s.end < ins_t.len())
                .map(|s| (ins_t[s.start], ins_t[s.end]))
                .collect()
        }
        Activity::SitToStand | Activity::StandToSit => {
            let (times, angles) = knee.as_ref().expect("pose loaded for sit/stand");
            let rate = stream_rate(times).unwrap_or(60.0);
            detect_sit_stand(angles, rate)
                .map(|s| (times[s.start], times[s.end - 1]))
                .into_iter()
                .collect()
        }
        Activity::Null => {
            return Err(PipelineError::Config("no knee moment model for the null activity".into()));
        }
    };

    let mut lo = ins_t.first().copied().unwrap_or(0.0).max(mocap_t.first().copied().unwrap_or(0.0));
    let mut hi = ins_t.last().copied().unwrap_or(0.0).min(mocap_t.last().copied().unwrap_or(0.0));
    if let Some((times, _)) = &knee {
        lo = lo.max(times[0]);
        hi = hi.min(*times.last().expect("non-empty pose"));
    }
    let channels: Vec<Vec<f64>> = Sensor::ALL
        .iter()
        .flat_map(|&s| Axis::FORCES.iter().map(move |&a| channel_index(s, a)))
        .map(|c| insole.frames().iter().map(|f| f.channels[c] as f64).collect())
        .collect();
    let total = insole.total_vertical_force();
    let kam = mocap.kam();
    let grf = mocap.grf_z();

    let n_cols = FORCE_CHANNELS + with_knee_angle as usize;
    let mut out = Vec::new();
    for (k, &(a, b)) in spans.iter().enumerate() {
        if a < lo || b > hi || b <= a {
            continue;
        }
        let g = grid(a, b);
        let mut inputs = Array2::zeros((STRIDE_POINTS, n_cols));
        for (c, series) in channels.iter().enumerate() {
            for (j, v) in interp_linear(&ins_t, series, &g).into_iter().enumerate() {
                inputs[[j, c]] = v;
            }
        }
        if with_knee_angle {
            let (times, angles) = knee.as_ref().expect("pose loaded");
            for (j, v) in interp_linear(times, angles, &g).into_iter().enumerate() {
                inputs[[j, FORCE_CHANNELS]] = v;
            }
        }
        let force_agreement = pearson_r(&interp_linear(&ins_t, &total, &g), &interp_linear(&mocap_t, &grf, &g));
        out.push(StrideSample {
            inputs,
            target: interp_linear(&mocap_t, &kam, &g),
            activity: t.activity,
            trial_id: t.id.clone(),
            subject_id: t.subject_id.clone(),
            stride: k,
            start_us: a,
            end_us: b,
            force_agreement,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KamConfig {
    pub hidden: usize,
    pub dense: usize,
    pub with_knee_angle: bool,
    pub train: TrainConfig,
}

impl Default for KamConfig {
    fn default() -> Self {
        Self::for_activity(Activity::Walk)
    }
}

impl KamConfig {
    /// Default settings: 128 hidden units, learning rate 0.01 and 150 epochs,
    /// which trains stably on every activity within a couple of minutes.
    /// Otherwise as [`KamConfig::reference`]: dense layer of 32, dropout 0.2,
    /// lr halved on validation plateaus, batch 20 for walking, 10 otherwise.
    pub fn for_activity(activity: Activity) -> Self {
        let mut c = Self::reference(activity);
        c.hidden = 128;
        c.train.learning_rate = 0.01;
        c.train.max_epochs = 150;
        c
    }

    /// The larger original setting (256 units for sit/stand, learning rate
    /// 0.08, 300 epochs). Slower, and without the knee channel the sit/stand
    /// models can collapse to a constant output at this learning rate.
    pub fn reference(activity: Activity) -> Self {
        Self {
            hidden: if activity.is_sit_stand() { 256 } else { 128 },
            dense: 32,
            with_knee_angle: false,
            train: TrainConfig {
                learning_rate: 0.08,
                batch_size: if activity == Activity::Walk { 20 } else { 10 },
                max_epochs: 300,
                early_stop_patience: 0,
                plateau_factor: 0.5,
                plateau_patience: 10,
                dropout: 0.2,
                seed: 0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.dense == 0 {
            return Err(PipelineError::Config("layer sizes must be positive".into()));
        }
        self.train.validate().map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn input_channels(&self) -> usize {
        FORCE_CHANNELS + self.with_knee_angle as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KamEpochLog {
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean absolute error in N·m, dropout active.
    pub train_mae: f64,
    pub val_mae: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KamReport {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub history: Vec<KamEpochLog>,
}

/// Per-activity knee adduction moment regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct KamModel {
    pub activity: Activity,
    pub net: LstmRegressor,
    pub input_std: Standardizer,
    pub target_mean: f64,
    pub target_scale: f64,
    pub config: KamConfig,
    pub report: KamReport,
}

#[derive(Serialize, Deserialize)]
struct KamMeta {
    activity: Activity,
    input_std: Standardizer,
    target_mean: f64,
    target_scale: f64,
    config: KamConfig,
    report: KamReport,
}

fn check_samples<'a>(samples: impl IntoIterator<Item = &'a StrideSample>, activity: Activity, channels: usize) -> Result<()> {
    for s in samples {
        if s.activity != activity {
            return Err(PipelineError::Data(format!(
                "stride {} of {} is {}, expected {activity}",
                s.stride, s.trial_id, s.activity
            )));
        }
        if s.inputs.dim() != (STRIDE_POINTS, channels) || s.target.len() != STRIDE_POINTS {
            return Err(PipelineError::Data(format!(
                "stride {} of {} has shape {:?}, expected ({STRIDE_POINTS}, {channels})",
                s.stride,
                s.trial_id,
                s.inputs.dim()
            )));
        }
    }
    Ok(())
}

impl KamModel {
    fn inputs(&self, samples: &[&StrideSample]) -> ndarray::Array3<f64> {
        let xs: Vec<Array2<f64>> = samples.iter().map(|s| self.input_std.apply(s.inputs.view())).collect();
        stack_time_major(&xs.iter().collect::<Vec<_>>())
    }

    /// Predicted KAM waveforms in N·m, one per sample.
    pub fn predict(&self, samples: &[&StrideSample]) -> Result<Vec<Vec<f64>>> {
        check_samples(samples.iter().copied(), self.activity, self.config.input_channels())?;
        let mut out = Vec::with_capacity(samples.len());
        for chunk in samples.chunks(64) {
            let y = self.net.predict(self.inputs(chunk).view())?;
            for row in y.rows() {
                out.push(row.iter().map(|v| v * self.target_scale + self.target_mean).collect());
            }
        }
        Ok(out)
    }

    fn kind(&self) -> String {
        format!("lstm-kam-{}", self.activity)
    }

    fn stem(activity: Activity) -> String {
        format!("kam_{activity}")
    }

    /// Writes `kam_<activity>.gfnn` and `kam_<activity>.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let stem = Self::stem(self.activity);
        write_bytes(&dir.join(format!("{stem}.gfnn")), &write_checkpoint(&self.kind(), &self.net))?;
        let meta = KamMeta {
            activity: self.activity,
            input_std: self.input_std.clone(),
            target_mean: self.target_mean,
            target_scale: self.target_scale,
            config: self.config.clone(),
            report: self.report.clone(),
        };
        write_json(&dir.join(format!("{stem}.json")), &meta)
    }

    pub fn load(dir: &Path, activity: Activity) -> Result<Self> {
        let stem = Self::stem(activity);
        let meta: KamMeta = read_json(&dir.join(format!("{stem}.json")))?;
        let c = &meta.config;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = LstmRegressor::new(c.input_channels(), c.hidden, c.dense, c.train.dropout, &mut rng);
        let path = dir.join(format!("{stem}.gfnn"));
        let bad = |e: gaitforge_nn::NnError| PipelineError::Data(format!("{}: {e}", path.display()));
        let ckpt = read_checkpoint(&read_bytes(&path)?).map_err(bad)?;
        ckpt.load_into(&mut net).map_err(bad)?;
        let model = Self {
            activity: meta.activity,
            net,
            input_std: meta.input_std,
            target_mean: meta.target_mean,
            target_scale: meta.target_scale,
            config: meta.config,
            report: meta.report,
        };
        if model.activity != activity || ckpt.kind != model.kind() {
            return Err(PipelineError::Data(format!("{}: not a {activity} knee moment model", path.display())));
        }
        Ok(model)
    }
}

fn mae_nm(model: &KamModel, samples: &[&StrideSample]) -> Result<f64> {
    let preds = model.predict(samples)?;
    let mut total = 0.0;
    let mut n = 0usize;
    for (p, s) in preds.iter().zip(samples) {
        for (a, b) in p.iter().zip(&s.target) {
            total += (a - b).abs();
            n += 1;
        }
    }
    Ok(total / n.max(1) as f64)
}

/// Trains an LSTM regressor on stride samples of one activity, minimizing
/// the mean absolute error over all time points with Adam. Inputs are
/// standardized per channel and targets by their overall mean and standard
/// deviation, both fitted on the training strides. With validation strides,
/// the learning rate is reduced on plateaus of validation MAE, optional early
/// stopping applies, and the parameters of the best validation epoch are
/// kept. Deterministic for a given seed.
pub fn train_kam(
    train: &[StrideSample],
    val: &[StrideSample],
    activity: Activity,
    config: &KamConfig,
) -> Result<KamModel> {
    config.validate()?;
    if train.is_empty() {
        return Err(PipelineError::Data(format!("no {activity} training strides")));
    }
    let channels = config.input_channels();
    check_samples(train, activity, channels)?;
    check_samples(val, activity, channels)?;
    let tc = &config.train;

    let input_std = Standardizer::fit(train.iter().map(|s| s.inputs.view()), channels);
    let all: Vec<f64> = train.iter().flat_map(|s| s.target.iter().copied()).collect();
    let stats = MeanStd::of(&all);
    let target_scale = if stats.std > 1e-9 { stats.std } else { 1.0 };

    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let net = LstmRegressor::new(channels, config.hidden, config.dense, tc.dropout, &mut rng);
    let mut model = KamModel {
        activity,
        net,
        input_std,
        target_mean: stats.mean,
        target_scale,
        config: config.clone(),
        report: KamReport {
            epochs_run: 0,
            best_epoch: 0,
            history: Vec::new(),
        },
    };
    let xs: Vec<Array2<f64>> = train.iter().map(|s| model.input_std.apply(s.inputs.view())).collect();
    let ys: Vec<Vec<f64>> = train
        .iter()
        .map(|s| s.target.iter().map(|v| (v - model.target_mean) / model.target_scale).collect())
        .collect();
    let val_refs: Vec<&StrideSample> = val.iter().collect();

    let mut adam = Adam::new();
    let mut plateau = PlateauScheduler::new(tc.plateau_factor, tc.plateau_patience.max(1));
    // Tracks the best validation epoch; patience 0 means "never stop early".
    let mut best = EarlyStopping::new(if tc.early_stop_patience == 0 { usize::MAX } else { tc.early_stop_patience });
    let mut lr = tc.learning_rate;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::new();

    for epoch in 1..=tc.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(tc.batch_size) {
            let refs: Vec<&Array2<f64>> = batch.iter().map(|&i| &xs[i]).collect();
            let mut target = Array2::zeros((batch.len(), STRIDE_POINTS));
            for (b, &i) in batch.iter().enumerate() {
                for (j, v) in ys[i].iter().enumerate() {
                    target[[b, j]] = *v;
                }
            }
            let (loss, grads) = model.net.loss_and_grad(stack_time_major(&refs).view(), target.view(), Some(&mut rng))?;
            adam.step(&mut model.net, &grads, lr);
            total += loss * batch.len() as f64;
        }
        if !model.net.all_finite() {
            return Err(PipelineError::Data(format!("{activity} regressor diverged at epoch {epoch}")));
        }
        let train_mae = total / train.len() as f64 * model.target_scale;
        let val_mae = if val.is_empty() { None } else { Some(mae_nm(&model, &val_refs)?) };
        history.push(KamEpochLog {
            epoch,
            learning_rate: lr,
            train_mae,
            val_mae,
        });
        log::debug!("{activity} epoch {epoch}: lr {lr:.2e} train {train_mae:.4} val {val_mae:?}");
        if let Some(v) = val_mae {
            if tc.plateau_patience > 0 {
                lr = plateau.step(lr, v);
            }
            if let StopDecision::Stop { .. } = best.update(epoch, v, &model.net) {
                break;
            }
        }
    }
    model.report.epochs_run = history.len();
    model.report.best_epoch = history.len();
    if !val.is_empty() {
        model.report.best_epoch = best.best_epoch();
        if let Some(net) = best.into_best() {
            model.net = net;
        }
    }
    model.report.history = history;
    Ok(model)
}

/// Per-stride Pearson r and MAE between predicted and target waveforms,
/// with MAE also expressed in %BW*ht of each stride's subject. Strides with
/// a constant target are left out of `r` and counted.
pub fn evaluate_kam(
    model: &KamModel,
    samples: &[StrideSample],
    subjects: &[Subject],
) -> Result<(KamMetrics, Vec<StrideRow>, Vec<Vec<f64>>)> {
    let refs: Vec<&StrideSample> = samples.iter().collect();
    let preds = model.predict(&refs)?;
    let rows = score_strides(samples, &preds, subjects)?;
    Ok((summarize(model.activity, &rows), rows, preds))
}

/// Scores predictions against their samples.
pub fn score_strides(samples: &[StrideSample], preds: &[Vec<f64>], subjects: &[Subject]) -> Result<Vec<StrideRow>> {
    samples
        .iter()
        .zip(preds)
        .map(|(s, p)| {
            let subject = subjects
                .iter()
                .find(|x| x.id == s.subject_id)
                .ok_or_else(|| PipelineError::Data(format!("unknown subject {}", s.subject_id)))?;
            let mae = p.iter().zip(&s.target).map(|(a, b)| (a - b).abs()).sum::<f64>() / s.target.len() as f64;
            Ok(StrideRow {
                trial_id: s.trial_id.clone(),
                subject_id: s.subject_id.clone(),
                stride: s.stride,
                r: pearson_r(p, &s.target),
                mae_nm: mae,
                mae_pct_bwht: kam_to_pct_bwht(mae, subject),
            })
        })
        .collect()
}

pub fn summarize(activity: Activity, rows: &[StrideRow]) -> KamMetrics {
    let rs: Vec<f64> = rows.iter().filter_map(|r| r.r).collect();
    let nm: Vec<f64> = rows.iter().map(|r| r.mae_nm).collect();
    let pct: Vec<f64> = rows.iter().map(|r| r.mae_pct_bwht).collect();
    KamMetrics {
        activity,
        n_strides: rows.len(),
        excluded_from_r: rows.len() - rs.len(),
        r: MeanStd::of(&rs),
        mae_nm: MeanStd::of(&nm),
        mae_pct_bwht: MeanStd::of(&pct),
    }
}

/// Mean ± std of predicted and target waveforms at each stride percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformRow {
    pub percent: usize,
    pub pred_mean: f64,
    pub pred_std: f64,
    pub target_mean: f64,
    pub target_std: f64,
}

pub fn waveform_summary(samples: &[StrideSample], preds: &[Vec<f64>]) -> Vec<WaveformRow> {
    (0..STRIDE_POINTS)
        .map(|j| {
            let p = MeanStd::of(&preds.iter().map(|w| w[j]).collect::<Vec<_>>());
            let t = MeanStd::of(&samples.iter().map(|s| s.target[j]).collect::<Vec<_>>());
            WaveformRow {
                percent: j,
                pred_mean: p.mean,
                pred_std: p.std,
                target_mean: t.mean,
                target_std: t.std,
            }
        })
        .collect()
}
