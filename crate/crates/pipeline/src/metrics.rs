use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use gaitforge_core::Activity;

/// Window-level classification scores. Confusion rows are true classes and
/// columns predicted classes, both in [`Activity::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub n: usize,
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
}

impl ClassMetrics {
    pub fn from_predictions(truth: &[Activity], pred: &[Activity]) -> Self {
        assert_eq!(truth.len(), pred.len(), "one prediction per sample");
        let mut confusion = vec![vec![0usize; Activity::COUNT]; Activity::COUNT];
        let mut correct = 0;
        for (&t, &p) in truth.iter().zip(pred) {
            confusion[t.index()][p.index()] += 1;
            correct += (t == p) as usize;
        }
        let n = truth.len();
        Self {
            n,
            accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
            confusion,
        }
    }

    /// Collapses window predictions to one vote per trial (most frequent
    /// class, ties to the lower class index) and scores the trials.
    pub fn trial_majority(truth: &[Activity], pred: &[Activity], trial_ids: &[String]) -> Self {
        let mut votes: BTreeMap<&str, (Activity, [usize; Activity::COUNT])> = BTreeMap::new();
        for ((t, p), id) in truth.iter().zip(pred).zip(trial_ids) {
            votes.entry(id.as_str()).or_insert((*t, [0; Activity::COUNT])).1[p.index()] += 1;
        }
        let (tt, pp): (Vec<Activity>, Vec<Activity>) = votes
            .values()
            .map(|(t, counts)| (*t, Activity::ALL[argmax_first(counts.iter().map(|&c| c as f64))]))
            .unzip();
        Self::from_predictions(&tt, &pp)
    }

    pub fn class_count(&self, activity: Activity) -> usize {
        self.confusion[activity.index()].iter().sum()
    }
}

/// Index of the largest value; ties go to the first.
pub(crate) fn argmax_first(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Sample Pearson correlation. `None` when the lengths differ, fewer than
/// two points are given, or either series is constant.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: 0.0, std: 0.0, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { mean, std, n }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.3} ± {:.3}", self.mean, self.std)
    }
}

/// Scores of one predicted stride.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrideRow {
    pub trial_id: String,
    pub subject_id: String,
    pub stride: usize,
    /// Absent when the target waveform is constant.
    pub r: Option<f64>,
    pub mae_nm: f64,
    pub mae_pct_bwht: f64,
}

/// Per-stride regression scores aggregated over strides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KamMetrics {
    pub activity: Activity,
    pub n_strides: usize,
    /// Strides left out of `r` because their target is constant.
    pub excluded_from_r: usize,
    pub r: MeanStd,
    pub mae_nm: MeanStd,
    pub mae_pct_bwht: MeanStd,
}
