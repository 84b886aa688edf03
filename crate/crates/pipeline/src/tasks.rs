//! Complete train / evaluate / infer runs with their on-disk artifacts.
//! The command-line tool is a thin layer over these functions, so a library
//! call and a command with the same configuration produce identical files.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use gaitforge_core::{Activity, Split, SplitMember, SplitRatios};

use crate::ensemble::{evaluate_ensemble, Probs};
use crate::grid::KamGrid;
use crate::io::{create_dir, read_json, write_csv, write_json};
use crate::kam::{summarize, waveform_summary, WaveformRow};
use crate::{
    build_class_windows, evaluate_kam, extract_kam_samples, grid_search, pair_windows, train_classifier, train_kam,
    ClassMetrics, ClassWindow, ClassifierConfig, ClassifierEnsemble, Dataset, GridResult, KamConfig, KamMetrics,
    KamModel, Modality, PipelineError, Result, StrideRow, StrideSample, SyncedTrial,
};

pub const SPLIT_FILE: &str = "split.json";
pub const METRICS_FILE: &str = "metrics.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let r = SplitRatios::default();
        Self {
            train: r.train,
            val: r.val,
            test: r.test,
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn ratios(&self) -> SplitRatios {
        SplitRatios {
            train: self.train,
            val: self.val,
            test: self.test,
        }
    }
}

/// Subject ids of each split member, as stored next to trained models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub config: SplitConfig,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl SplitRecord {
    fn new(config: &SplitConfig, split: &Split) -> Self {
        let v = |s: &BTreeSet<String>| s.iter().cloned().collect();
        Self {
            config: config.clone(),
            train: v(&split.train),
            val: v(&split.val),
            test: v(&split.test),
        }
    }

    pub fn split(&self) -> Split {
        let s = |v: &[String]| v.iter().cloned().collect();
        Split {
            train: s(&self.train),
            val: s(&self.val),
            test: s(&self.test),
        }
    }
}

/// Fails if any subject contributes to more than one of the three sets.
pub fn check_no_leakage<'a>(
    train: impl IntoIterator<Item = &'a str>,
    val: impl IntoIterator<Item = &'a str>,
    test: impl IntoIterator<Item = &'a str>,
) -> Result<()> {
    let sets: [BTreeSet<&str>; 3] = [train.into_iter().collect(), val.into_iter().collect(), test.into_iter().collect()];
    for i in 0..3 {
        for j in i + 1..3 {
            if let Some(s) = sets[i].intersection(&sets[j]).next() {
                return Err(PipelineError::Data(format!("subject {s} appears in more than one split")));
            }
        }
    }
    Ok(())
}

fn split_dataset<'a>(ds: &'a Dataset, config: &SplitConfig) -> Result<(Split, [Vec<&'a SyncedTrial>; 3])> {
    let split = ds.split(config.ratios(), config.seed)?;
    let parts = [SplitMember::Train, SplitMember::Val, SplitMember::Test].map(|m| ds.trials_in(&split, m));
    Ok((split, parts))
}

fn write_split(out: &Path, config: &SplitConfig, split: &Split) -> Result<()> {
    write_json(&out.join(SPLIT_FILE), &SplitRecord::new(config, split))
}

fn read_split(dir: &Path) -> Result<Split> {
    Ok(read_json::<SplitRecord>(&dir.join(SPLIT_FILE))?.split())
}

// ---------------------------------------------------------------------------
// Activity classification

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierTask {
    pub split: SplitConfig,
    pub modalities: Vec<Modality>,
    pub pose: ClassifierConfig,
    pub insole: ClassifierConfig,
}

impl Default for ClassifierTask {
    fn default() -> Self {
        Self {
            split: SplitConfig::default(),
            modalities: Modality::ALL.to_vec(),
            pose: ClassifierConfig::for_modality(Modality::Pose),
            insole: ClassifierConfig::for_modality(Modality::Insole),
        }
    }
}

impl ClassifierTask {
    /// Sets the training seed of every classifier.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.pose.train.seed = seed;
        self.insole.train.seed = seed;
        self
    }

    pub fn config(&self, modality: Modality) -> &ClassifierConfig {
        match modality {
            Modality::Pose => &self.pose,
            Modality::Insole => &self.insole,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityMetrics {
    pub train_windows: usize,
    pub val_windows: usize,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub val: ClassMetrics,
    pub test: ClassMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMetrics {
    pub pose: Option<ModalityMetrics>,
    pub insole: Option<ModalityMetrics>,
    /// Window-level scores of the averaged ensemble over paired test windows.
    pub ensemble: ClassMetrics,
    /// The same predictions collapsed to one majority vote per trial.
    pub ensemble_trial_level: ClassMetrics,
}

impl ClassifierMetrics {
    pub fn modality(&self, m: Modality) -> Option<&ModalityMetrics> {
        match m {
            Modality::Pose => self.pose.as_ref(),
            Modality::Insole => self.insole.as_ref(),
        }
    }
}

/// One ensemble decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPrediction {
    pub trial_id: String,
    pub subject_id: String,
    pub center_us: i64,
    pub sources: String,
    pub truth: Activity,
    pub predicted: Activity,
    pub p_walk: f64,
    pub p_run: f64,
    pub p_sts: f64,
    pub p_stst: f64,
    pub p_null: f64,
}

#[derive(Debug, Clone)]
pub struct ClassifierOutcome {
    pub split: Split,
    pub ensemble: ClassifierEnsemble,
    pub metrics: ClassifierMetrics,
    pub predictions: Vec<WindowPrediction>,
    /// Trials that produced no windows.
    pub skipped: Vec<String>,
}

fn window_predictions(
    ensemble: &ClassifierEnsemble,
    pose: &[ClassWindow],
    insole: &[ClassWindow],
) -> Result<(ClassMetrics, Vec<WindowPrediction>)> {
    let (metrics, preds) = evaluate_ensemble(ensemble, pose, insole)?;
    let usable = |w: Option<usize>, m: Modality| w.filter(|_| ensemble.model(m).is_some());
    let rows = pair_windows(pose, insole)
        .into_iter()
        .filter_map(|(p, i)| {
            let (p, i) = (usable(p, Modality::Pose), usable(i, Modality::Insole));
            let w = p.map(|k| &pose[k]).or(i.map(|k| &insole[k]))?;
            let sources = match (p, i) {
                (Some(_), Some(_)) => "pose+insole",
                (Some(_), None) => "pose",
                _ => "insole",
            };
            Some((w, sources))
        })
        .zip(&preds)
        .map(|((w, sources), (probs, predicted)): ((&ClassWindow, &str), &(Probs, Activity))| WindowPrediction {
            trial_id: w.trial_id.clone(),
            subject_id: w.subject_id.clone(),
            center_us: w.center_us,
            sources: sources.to_string(),
            truth: w.label,
            predicted: *predicted,
            p_walk: probs[0],
            p_run: probs[1],
            p_sts: probs[2],
            p_stst: probs[3],
            p_null: probs[4],
        })
        .collect();
    Ok((metrics, rows))
}

fn trial_level(rows: &[WindowPrediction]) -> ClassMetrics {
    let truth: Vec<Activity> = rows.iter().map(|r| r.truth).collect();
    let pred: Vec<Activity> = rows.iter().map(|r| r.predicted).collect();
    let ids: Vec<String> = rows.iter().map(|r| r.trial_id.clone()).collect();
    ClassMetrics::trial_majority(&truth, &pred, &ids)
}

/// Trains the requested single-modality classifiers on the training
/// subjects, early-stops on the validation subjects and scores each model
/// and their ensemble on the test subjects.
pub fn run_classifier_task(ds: &Dataset, task: &ClassifierTask) -> Result<ClassifierOutcome> {
    if task.modalities.is_empty() {
        return Err(PipelineError::Config("no modality selected".into()));
    }
    let (split, [train, val, test]) = split_dataset(ds, &task.split)?;
    let mut ensemble = ClassifierEnsemble::default();
    let mut per_modality = [None, None];
    let mut test_windows: [Vec<ClassWindow>; 2] = [Vec::new(), Vec::new()];
    let mut skipped = Vec::new();
    for (k, m) in Modality::ALL.into_iter().enumerate() {
        let [tr, va, te] = [&train, &val, &test].map(|t| build_class_windows(t, m));
        if !task.modalities.contains(&m) {
            test_windows[k] = te.windows;
            continue;
        }
        for set in [&tr, &va, &te] {
            skipped.extend(set.skipped.iter().map(|s| format!("{m}: {s}")));
        }
        check_no_leakage(
            tr.windows.iter().map(|w| w.subject_id.as_str()),
            va.windows.iter().map(|w| w.subject_id.as_str()),
            te.windows.iter().map(|w| w.subject_id.as_str()),
        )?;
        let model = train_classifier(&tr.windows, &va.windows, m, task.config(m))?;
        per_modality[k] = Some(ModalityMetrics {
            train_windows: tr.windows.len(),
            val_windows: va.windows.len(),
            epochs_run: model.report.epochs_run,
            best_epoch: model.report.best_epoch,
            val: model.evaluate(&va.windows)?,
            test: model.evaluate(&te.windows)?,
        });
        match m {
            Modality::Pose => ensemble.pose = Some(model),
            Modality::Insole => ensemble.insole = Some(model),
        }
        test_windows[k] = te.windows;
    }
    let [pose_w, insole_w] = &test_windows;
    let (ens_metrics, predictions) = window_predictions(&ensemble, pose_w, insole_w)?;
    let [pose, insole] = per_modality;
    Ok(ClassifierOutcome {
        split,
        ensemble,
        metrics: ClassifierMetrics {
            pose,
            insole,
            ensemble: ens_metrics,
            ensemble_trial_level: trial_level(&predictions),
        },
        predictions,
        skipped,
    })
}

/// Writes models, `split.json`, `metrics.json` and `predictions.csv`.
pub fn write_classifier_outcome(out: &Path, task: &ClassifierTask, outcome: &ClassifierOutcome) -> Result<()> {
    create_dir(out)?;
    outcome.ensemble.save(out)?;
    write_split(out, &task.split, &outcome.split)?;
    write_json(&out.join(METRICS_FILE), &outcome.metrics)?;
    write_csv(&out.join("predictions.csv"), &outcome.predictions)
}

// ---------------------------------------------------------------------------
// Knee adduction moment

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KamTask {
    pub split: SplitConfig,
    pub activity: Activity,
    pub with_knee_angle: bool,
    /// Model and training settings; the activity defaults when absent.
    pub model: Option<KamConfig>,
    /// When set, every (hidden size, learning rate) cell is trained and the
    /// one with the lowest validation MAE is kept.
    pub grid: Option<KamGrid>,
    pub seed: u64,
}

impl Default for KamTask {
    fn default() -> Self {
        Self {
            split: SplitConfig::default(),
            activity: Activity::Walk,
            with_knee_angle: false,
            model: None,
            grid: None,
            seed: 0,
        }
    }
}

impl KamTask {
    /// The model configuration actually trained (before any grid search).
    pub fn effective_config(&self) -> KamConfig {
        let mut c = self.model.clone().unwrap_or_else(|| KamConfig::for_activity(self.activity));
        c.with_knee_angle = self.with_knee_angle;
        c.train.seed = self.seed;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KamRunMetrics {
    pub activity: Activity,
    pub with_knee_angle: bool,
    pub train_strides: usize,
    pub val_strides: usize,
    pub test_strides: usize,
    /// Training strides whose insole and mocap forces disagree.
    pub misaligned_strides: usize,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub hidden: usize,
    pub learning_rate: f64,
    pub grid: Option<GridResult<(usize, f64)>>,
    pub val: Option<KamMetrics>,
    pub test: KamMetrics,
}

#[derive(Debug, Clone)]
pub struct KamOutcome {
    pub split: Split,
    pub model: KamModel,
    pub metrics: KamRunMetrics,
    pub rows: Vec<StrideRow>,
    pub waveform: Vec<WaveformRow>,
}

/// Stride samples of one activity from a set of trials, extracted in
/// parallel and returned in trial order.
pub fn collect_kam_samples(trials: &[&SyncedTrial], activity: Activity, with_knee_angle: bool) -> Result<Vec<StrideSample>> {
    let per_trial = trials
        .par_iter()
        .filter(|t| t.trial.activity == activity)
        .map(|t| extract_kam_samples(t, with_knee_angle))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Extracts strides of the task's activity, trains the regressor (with an
/// optional grid search over hidden size and learning rate scored on the
/// validation subjects) and scores it on the test subjects.
pub fn run_kam_task(ds: &Dataset, task: &KamTask) -> Result<KamOutcome> {
    if task.activity == Activity::Null {
        return Err(PipelineError::Config("knee moment models exist for walk, run, sts and stst only".into()));
    }
    let (split, [train, val, test]) = split_dataset(ds, &task.split)?;
    let [tr, va, te] = [&train, &val, &test].map(|t| collect_kam_samples(t, task.activity, task.with_knee_angle));
    let (tr, va, te) = (tr?, va?, te?);
    check_no_leakage(
        tr.iter().map(|s| s.subject_id.as_str()),
        va.iter().map(|s| s.subject_id.as_str()),
        te.iter().map(|s| s.subject_id.as_str()),
    )?;
    if te.is_empty() {
        return Err(PipelineError::Data(format!("no {} test strides", task.activity)));
    }
    let base = task.effective_config();
    let (model, grid) = match &task.grid {
        None => (train_kam(&tr, &va, task.activity, &base)?, None),
        Some(g) => {
            if va.is_empty() {
                return Err(PipelineError::Data("grid search needs validation strides".into()));
            }
            let mut best: Option<(f64, KamModel)> = None;
            let result = grid_search(&g.cells(), |&(hidden, lr)| {
                let mut c = base.clone();
                c.hidden = hidden;
                c.train.learning_rate = lr;
                let m = train_kam(&tr, &va, task.activity, &c)?;
                let (vm, _, _) = evaluate_kam(&m, &va, &ds.manifest.subjects)?;
                let score = vm.mae_nm.mean;
                if best.as_ref().is_none_or(|(b, _)| score < *b) {
                    best = Some((score, m));
                }
                Ok(score)
            })?;
            (best.expect("non-empty grid").1, Some(result))
        }
    };
    let subjects = &ds.manifest.subjects;
    let val_metrics = if va.is_empty() { None } else { Some(evaluate_kam(&model, &va, subjects)?.0) };
    let (test_metrics, rows, preds) = evaluate_kam(&model, &te, subjects)?;
    let metrics = KamRunMetrics {
        activity: task.activity,
        with_knee_angle: task.with_knee_angle,
        train_strides: tr.len(),
        val_strides: va.len(),
        test_strides: te.len(),
        misaligned_strides: tr.iter().filter(|s| !s.is_aligned()).count(),
        epochs_run: model.report.epochs_run,
        best_epoch: model.report.best_epoch,
        hidden: model.config.hidden,
        learning_rate: model.config.train.learning_rate,
        grid,
        val: val_metrics,
        test: test_metrics,
    };
    Ok(KamOutcome {
        split,
        waveform: waveform_summary(&te, &preds),
        model,
        metrics,
        rows,
    })
}

fn kam_metrics_file(activity: Activity) -> String {
    format!("kam_{activity}_metrics.json")
}

/// Writes the model, `split.json`, `kam_<activity>_metrics.json`,
/// `kam_<activity>_strides.csv` and `kam_<activity>_waveform.csv`.
pub fn write_kam_outcome(out: &Path, task: &KamTask, outcome: &KamOutcome) -> Result<()> {
    create_dir(out)?;
    outcome.model.save(out)?;
    write_split(out, &task.split, &outcome.split)?;
    let a = task.activity;
    write_json(&out.join(kam_metrics_file(a)), &outcome.metrics)?;
    write_csv(&out.join(format!("kam_{a}_strides.csv")), &outcome.rows)?;
    write_csv(&out.join(format!("kam_{a}_waveform.csv")), &outcome.waveform)
}

// ---------------------------------------------------------------------------
// Evaluation and inference with saved models

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: Option<EvalClassifier>,
    pub kam: Vec<KamMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalClassifier {
    pub pose: Option<ClassMetrics>,
    pub insole: Option<ClassMetrics>,
    pub ensemble: ClassMetrics,
    pub ensemble_trial_level: ClassMetrics,
}

fn kam_models(dir: &Path) -> Result<Vec<KamModel>> {
    Activity::ALL
        .into_iter()
        .filter(|a| dir.join(format!("kam_{a}.json")).exists())
        .map(|a| KamModel::load(dir, a))
        .collect()
}

fn has_classifier(dir: &Path) -> bool {
    Modality::ALL.iter().any(|m| dir.join(format!("{m}_classifier.json")).exists())
}

/// Re-scores every model saved in `model_dir` on the test subjects recorded
/// in its `split.json`.
pub fn evaluate_saved(ds: &Dataset, model_dir: &Path) -> Result<EvalReport> {
    let split = read_split(model_dir)?;
    let test = ds.trials_in(&split, SplitMember::Test);
    let classifier = if has_classifier(model_dir) {
        let ens = ClassifierEnsemble::load(model_dir)?;
        let pose = build_class_windows(&test, Modality::Pose).windows;
        let insole = build_class_windows(&test, Modality::Insole).windows;
        let score = |m: Modality, w: &[ClassWindow]| ens.model(m).map(|c| c.evaluate(w)).transpose();
        let (ensemble, rows) = window_predictions(&ens, &pose, &insole)?;
        Some(EvalClassifier {
            pose: score(Modality::Pose, &pose)?,
            insole: score(Modality::Insole, &insole)?,
            ensemble,
            ensemble_trial_level: trial_level(&rows),
        })
    } else {
        None
    };
    let mut kam = Vec::new();
    for model in kam_models(model_dir)? {
        let samples = collect_kam_samples(&test, model.activity, model.config.with_knee_angle)?;
        if samples.is_empty() {
            continue;
        }
        kam.push(evaluate_kam(&model, &samples, &ds.manifest.subjects)?.0);
    }
    if classifier.is_none() && kam.is_empty() {
        return Err(PipelineError::Data(format!("{}: no models to evaluate", model_dir.display())));
    }
    Ok(EvalReport { classifier, kam })
}

pub fn write_eval_report(out: &Path, report: &EvalReport) -> Result<()> {
    create_dir(out)?;
    write_json(&out.join("eval_metrics.json"), report)
}

/// Predicted KAM waveform of one stride, with the trial's activity label
/// taken from the classifier when one is available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StridePrediction {
    pub trial_id: String,
    pub stride: usize,
    pub activity: Activity,
    pub start_us: f64,
    pub end_us: f64,
    pub peak_kam_nm: f64,
    pub mean_kam_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferOutcome {
    pub windows: Vec<WindowPrediction>,
    pub strides: Vec<StridePrediction>,
}

/// Runs every saved model over all trials of a dataset. Window predictions
/// come from the classifier ensemble; each trial's majority class then picks
/// the knee moment model (falling back to the recorded label when no
/// classifier is saved).
pub fn infer_saved(ds: &Dataset, model_dir: &Path) -> Result<InferOutcome> {
    let all: Vec<&SyncedTrial> = ds.trials.iter().collect();
    let windows = if has_classifier(model_dir) {
        let ens = ClassifierEnsemble::load(model_dir)?;
        let pose = build_class_windows(&all, Modality::Pose).windows;
        let insole = build_class_windows(&all, Modality::Insole).windows;
        window_predictions(&ens, &pose, &insole)?.1
    } else {
        Vec::new()
    };
    let models = kam_models(model_dir)?;
    let mut strides = Vec::new();
    for t in &all {
        let votes: Vec<Activity> = windows.iter().filter(|w| w.trial_id == t.trial.id).map(|w| w.predicted).collect();
        let activity = if votes.is_empty() {
            t.trial.activity
        } else {
            let mut counts = [0usize; Activity::COUNT];
            for v in &votes {
                counts[v.index()] += 1;
            }
            Activity::ALL[crate::metrics::argmax_first(counts.iter().map(|&c| c as f64))]
        };
        let Some(model) = models.iter().find(|m| m.activity == activity) else {
            continue;
        };
        let mut relabeled = (*t).clone();
        relabeled.trial.activity = activity;
        let samples = match extract_kam_samples(&relabeled, model.config.with_knee_angle) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("trial {}: {e}", t.trial.id);
                continue;
            }
        };
        let refs: Vec<&StrideSample> = samples.iter().collect();
        for (s, p) in samples.iter().zip(model.predict(&refs)?) {
            strides.push(StridePrediction {
                trial_id: s.trial_id.clone(),
                stride: s.stride,
                activity,
                start_us: s.start_us,
                end_us: s.end_us,
                peak_kam_nm: p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_kam_nm: p.iter().sum::<f64>() / p.len() as f64,
            });
        }
    }
    if windows.is_empty() && models.is_empty() {
        return Err(PipelineError::Data(format!("{}: no models found", model_dir.display())));
    }
    Ok(InferOutcome { windows, strides })
}

pub fn write_infer_outcome(out: &Path, outcome: &InferOutcome) -> Result<()> {
    create_dir(out)?;
    write_csv(&out.join("window_predictions.csv"), &outcome.windows)?;
    write_csv(&out.join("stride_predictions.csv"), &outcome.strides)
}

/// Aggregates per-stride rows of several runs, e.g. across seeds.
pub fn pool_kam_rows(activity: Activity, runs: &[&[StrideRow]]) -> KamMetrics {
    let rows: Vec<StrideRow> = runs.iter().flat_map(|r| r.iter().cloned()).collect();
    summarize(activity, &rows)
}
