use serde::{Deserialize, Serialize};

use gaitforge_core::Activity;

use crate::GenError;

/// Trials generated per subject for each activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialCounts {
    pub walk: usize,
    pub run: usize,
    pub sit_to_stand: usize,
    pub stand_to_sit: usize,
    pub null: usize,
}

impl Default for TrialCounts {
    fn default() -> Self {
        Self {
            walk: 4,
            run: 3,
            sit_to_stand: 2,
            stand_to_sit: 2,
            null: 1,
        }
    }
}

impl TrialCounts {
    pub fn get(&self, activity: Activity) -> usize {
        match activity {
            Activity::Walk => self.walk,
            Activity::Run => self.run,
            Activity::SitToStand => self.sit_to_stand,
            Activity::StandToSit => self.stand_to_sit,
            Activity::Null => self.null,
        }
    }

    pub fn per_subject(&self) -> usize {
        Activity::ALL.iter().map(|&a| self.get(a)).sum()
    }
}

/// Measurement noise. Insole noise is relative to each channel's value plus
/// an absolute floor; pose noise is in normalized image units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    pub insole_rel: f64,
    pub insole_abs: f64,
    pub pose_xy: f64,
    pub pose_z: f64,
    /// Standard deviation of quiet-standing sway, as a fraction of body weight.
    pub sway: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            insole_rel: 0.01,
            insole_abs: 0.3,
            pose_xy: 0.002,
            pose_z: 0.01,
            sway: 0.03,
        }
    }
}

impl NoiseParams {
    pub fn none() -> Self {
        Self {
            insole_rel: 0.0,
            insole_abs: 0.0,
            pose_xy: 0.0,
            pose_z: 0.0,
            sway: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub seed: u64,
    pub n_subjects: usize,
    pub trials: TrialCounts,
    /// Stride period range in seconds.
    pub walk_stride_s: (f64, f64),
    pub run_stride_s: (f64, f64),
    /// Trial durations in seconds.
    pub walk_duration_s: f64,
    pub run_duration_s: f64,
    pub sit_stand_duration_s: f64,
    pub null_duration_s: f64,
    pub noise: NoiseParams,
    /// Soft-clip shear forces beyond the ±20 N calibrated range.
    pub saturate: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            seed: 0,
            n_subjects: 20,
            trials: TrialCounts::default(),
            walk_stride_s: (0.9, 1.3),
            run_stride_s: (0.6, 0.8),
            walk_duration_s: 5.0,
            run_duration_s: 3.5,
            sit_stand_duration_s: 3.0,
            null_duration_s: 5.0,
            noise: NoiseParams::default(),
            saturate: false,
        }
    }
}

impl GenParams {
    pub fn duration_s(&self, activity: Activity) -> f64 {
        match activity {
            Activity::Walk => self.walk_duration_s,
            Activity::Run => self.run_duration_s,
            Activity::SitToStand | Activity::StandToSit => self.sit_stand_duration_s,
            Activity::Null => self.null_duration_s,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Params(m.to_string()));
        if self.n_subjects == 0 {
            return bad("at least one subject is required");
        }
        for (lo, hi) in [self.walk_stride_s, self.run_stride_s] {
            if !(lo > 0.0 && hi >= lo) {
                return bad("stride ranges must be positive and ordered");
            }
        }
        for a in Activity::ALL {
            // Synchronization needs a full second of overlap after the offset.
            let min = 1.0 + 2.0 * crate::MAX_OFFSET_US as f64 / 1e6;
            if self.duration_s(a).is_nan() || self.duration_s(a) < min {
                return bad("trial durations must be at least 1.6 s");
            }
        }
        let n = &self.noise;
        if [n.insole_rel, n.insole_abs, n.pose_xy, n.pose_z, n.sway]
            .iter()
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return bad("noise levels must be finite and non-negative");
        }
        Ok(())
    }
}
