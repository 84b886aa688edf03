use std::collections::BTreeMap;
use std::path::Path;

use gaitforge_core::Activity;

use crate::metrics::argmax_first;
use crate::{ClassMetrics, ClassWindow, Modality, PipelineError, Result, TrainedClassifier};

/// Largest center-time difference between paired pose and insole windows.
pub const PAIR_MAX_DT_US: i64 = 100_000;

pub type Probs = [f64; Activity::COUNT];

/// Pose and insole classifiers whose probabilities are averaged. Either may
/// be absent; predictions then use whatever is available.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassifierEnsemble {
    pub pose: Option<TrainedClassifier>,
    pub insole: Option<TrainedClassifier>,
}

impl ClassifierEnsemble {
    pub fn model(&self, modality: Modality) -> Option<&TrainedClassifier> {
        match modality {
            Modality::Pose => self.pose.as_ref(),
            Modality::Insole => self.insole.as_ref(),
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        for m in [&self.pose, &self.insole].into_iter().flatten() {
            m.save(dir)?;
        }
        Ok(())
    }

    /// Loads whichever classifiers exist in `dir`; at least one must.
    pub fn load(dir: &Path) -> Result<Self> {
        let load = |m: Modality| -> Result<Option<TrainedClassifier>> {
            if dir.join(format!("{m}_classifier.json")).exists() {
                TrainedClassifier::load(dir, m).map(Some)
            } else {
                Ok(None)
            }
        };
        let ens = Self {
            pose: load(Modality::Pose)?,
            insole: load(Modality::Insole)?,
        };
        if ens.pose.is_none() && ens.insole.is_none() {
            return Err(PipelineError::Data(format!("{}: no classifier found", dir.display())));
        }
        Ok(ens)
    }
}

/// Element-wise mean of probability vectors.
pub fn average_probs(probs: &[Probs]) -> Probs {
    let n = probs.len().max(1) as f64;
    std::array::from_fn(|c| probs.iter().map(|p| p[c]).sum::<f64>() / n)
}

fn decide(probs: &[Probs]) -> Result<(Probs, Activity)> {
    if probs.is_empty() {
        return Err(PipelineError::Data("no usable input window for the ensemble".into()));
    }
    let avg = average_probs(probs);
    Ok((avg, Activity::ALL[argmax_first(avg.iter().copied())]))
}

/// Averages the softmax outputs of the models whose window is given; ties in
/// the argmax go to the lower class index. Paired windows must be centered
/// within 100 ms of each other.
pub fn ensemble_predict(
    ensemble: &ClassifierEnsemble,
    pose: Option<&ClassWindow>,
    insole: Option<&ClassWindow>,
) -> Result<(Probs, Activity)> {
    if let (Some(p), Some(i)) = (pose, insole) {
        let dt = (p.center_us - i.center_us).abs();
        if dt > PAIR_MAX_DT_US {
            return Err(PipelineError::Data(format!("paired windows are {dt} µs apart")));
        }
    }
    let mut probs = Vec::new();
    for (w, m) in [(pose, &ensemble.pose), (insole, &ensemble.insole)] {
        if let (Some(w), Some(m)) = (w, m) {
            probs.push(m.predict_proba(&[w])?[0]);
        }
    }
    decide(&probs)
}

/// Matches windows of the same trial for ensemble evaluation. Each pose
/// window is paired with the insole window whose center is nearest (earlier
/// on ties) if it lies within 100 ms; trials without pose windows contribute
/// their insole windows alone. Returns index pairs into the two slices.
pub fn pair_windows(pose: &[ClassWindow], insole: &[ClassWindow]) -> Vec<(Option<usize>, Option<usize>)> {
    let mut insole_by_trial: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, w) in insole.iter().enumerate() {
        insole_by_trial.entry(w.trial_id.as_str()).or_default().push(i);
    }
    let mut out = Vec::new();
    let mut has_pose = std::collections::BTreeSet::new();
    for (pi, pw) in pose.iter().enumerate() {
        has_pose.insert(pw.trial_id.as_str());
        let partner = insole_by_trial.get(pw.trial_id.as_str()).and_then(|idx| {
            let mut best: Option<(i64, usize)> = None;
            for &i in idx {
                let dt = (insole[i].center_us - pw.center_us).abs();
                if dt <= PAIR_MAX_DT_US && best.is_none_or(|(b, _)| dt < b) {
                    best = Some((dt, i));
                }
            }
            best.map(|(_, i)| i)
        });
        out.push((Some(pi), partner));
    }
    for (i, w) in insole.iter().enumerate() {
        if !has_pose.contains(w.trial_id.as_str()) {
            out.push((None, Some(i)));
        }
    }
    out
}

/// Ensemble predictions and scores over paired windows.
pub fn evaluate_ensemble(
    ensemble: &ClassifierEnsemble,
    pose: &[ClassWindow],
    insole: &[ClassWindow],
) -> Result<(ClassMetrics, Vec<(Probs, Activity)>)> {
    let proba = |m: Option<&TrainedClassifier>, ws: &[ClassWindow]| -> Result<Option<Vec<Probs>>> {
        match m {
            Some(m) if !ws.is_empty() => Ok(Some(m.predict_proba(&ws.iter().collect::<Vec<_>>())?)),
            _ => Ok(None),
        }
    };
    let pp = proba(ensemble.pose.as_ref(), pose)?;
    let ip = proba(ensemble.insole.as_ref(), insole)?;
    let mut truth = Vec::new();
    let mut preds = Vec::new();
    for (p, i) in pair_windows(pose, insole) {
        let mut probs = Vec::new();
        if let (Some(p), Some(pp)) = (p, &pp) {
            probs.push(pp[p]);
        }
        if let (Some(i), Some(ip)) = (i, &ip) {
            probs.push(ip[i]);
        }
        if probs.is_empty() {
            continue;
        }
        let label = p.map(|p| pose[p].label).or(i.map(|i| insole[i].label)).expect("pair has a window");
        truth.push(label);
        preds.push(decide(&probs)?);
    }
    let labels: Vec<Activity> = preds.iter().map(|p| p.1).collect();
    Ok((ClassMetrics::from_predictions(&truth, &labels), preds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_two() {
        let avg = average_probs(&[[0.6, 0.4, 0.0, 0.0, 0.0], [0.2, 0.8, 0.0, 0.0, 0.0]]);
        assert!((avg[0] - 0.4).abs() < 1e-15 && (avg[1] - 0.6).abs() < 1e-15);
        assert_eq!(decide(&[avg]).unwrap().1, Activity::Run);
    }

    #[test]
    fn tie_goes_to_lower_index() {
        assert_eq!(decide(&[[0.5, 0.5, 0.0, 0.0, 0.0]]).unwrap().1, Activity::Walk);
        assert!(decide(&[]).is_err());
    }
}
