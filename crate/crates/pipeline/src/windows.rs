use ndarray::Array2;
use serde::{Deserialize, Serialize};

use gaitforge_core::{Activity, InsoleStream, PoseStream, N_CHANNELS, N_KEYPOINTS};
use gaitforge_dsp::window_slices;

use crate::SyncedTrial;

pub const POSE_WINDOW: usize = 60;
pub const POSE_OVERLAP: usize = 50;
pub const INSOLE_WINDOW: usize = 82;
pub const INSOLE_OVERLAP: usize = 70;
/// 14 keypoints × (x, y).
pub const POSE_FEATURES: usize = 2 * N_KEYPOINTS;
pub const INSOLE_FEATURES: usize = N_CHANNELS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Pose,
    Insole,
}

impl Modality {
    pub const ALL: [Modality; 2] = [Modality::Pose, Modality::Insole];

    pub fn window(self) -> usize {
        match self {
            Modality::Pose => POSE_WINDOW,
            Modality::Insole => INSOLE_WINDOW,
        }
    }

    pub fn overlap(self) -> usize {
        match self {
            Modality::Pose => POSE_OVERLAP,
            Modality::Insole => INSOLE_OVERLAP,
        }
    }

    pub fn features(self) -> usize {
        match self {
            Modality::Pose => POSE_FEATURES,
            Modality::Insole => INSOLE_FEATURES,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modality::Pose => "pose",
            Modality::Insole => "insole",
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pose" | "video" => Ok(Modality::Pose),
            "insole" => Ok(Modality::Insole),
            _ => Err(format!("unknown modality {s:?}")),
        }
    }
}

/// One fixed-length classification window.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWindow {
    pub modality: Modality,
    /// `(window, features)`.
    pub features: Array2<f64>,
    pub label: Activity,
    /// Window center on the lab clock, µs.
    pub center_us: i64,
    pub trial_id: String,
    pub subject_id: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowSet {
    pub windows: Vec<ClassWindow>,
    /// Trials that produced no window, with the reason.
    pub skipped: Vec<String>,
}

/// Per-frame pose features: x and y of every keypoint.
pub fn pose_features(pose: &PoseStream) -> Array2<f64> {
    let mut out = Array2::zeros((pose.len(), POSE_FEATURES));
    for (mut row, frame) in out.rows_mut().into_iter().zip(pose.frames()) {
        for (k, kp) in frame.keypoints.iter().enumerate() {
            row[2 * k] = kp.x;
            row[2 * k + 1] = kp.y;
        }
    }
    out
}

/// Raw insole channels per frame.
pub fn insole_features(insole: &InsoleStream) -> Array2<f64> {
    let mut out = Array2::zeros((insole.len(), INSOLE_FEATURES));
    for (mut row, frame) in out.rows_mut().into_iter().zip(insole.frames()) {
        for (dst, &v) in row.iter_mut().zip(frame.channels.iter()) {
            *dst = v as f64;
        }
    }
    out
}

/// Slices every trial's stream of the given modality into overlapping
/// windows labeled with the trial activity. Trials lacking the stream or
/// shorter than one window are skipped and reported.
pub fn build_class_windows(trials: &[&SyncedTrial], modality: Modality) -> WindowSet {
    let mut set = WindowSet::default();
    for st in trials {
        let t = &st.trial;
        let (features, times): (Array2<f64>, Vec<i64>) = match modality {
            Modality::Pose => match &t.pose {
                Some(p) => (pose_features(p), p.times_us().into_iter().map(|x| x as i64).collect()),
                None => {
                    set.skipped.push(format!("{}: no pose stream", t.id));
                    continue;
                }
            },
            Modality::Insole => match &t.insole {
                Some(s) => (insole_features(s), s.times_us().into_iter().map(|x| st.insole_to_lab(x)).collect()),
                None => {
                    set.skipped.push(format!("{}: no insole stream", t.id));
                    continue;
                }
            },
        };
        let slices = window_slices(times.len(), modality.window(), modality.overlap()).expect("valid window constants");
        if slices.is_empty() {
            let msg = format!("{}: {} {modality} frames, shorter than one window", t.id, times.len());
            log::warn!("skipping trial {msg}");
            set.skipped.push(msg);
            continue;
        }
        for (a, b) in slices {
            set.windows.push(ClassWindow {
                modality,
                features: features.slice(ndarray::s![a..b, ..]).to_owned(),
                label: t.activity,
                center_us: (times[a] + times[b - 1]) / 2,
                trial_id: t.id.clone(),
                subject_id: t.subject_id.clone(),
            });
        }
    }
    set
}
