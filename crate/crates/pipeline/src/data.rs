use std::path::{Path, PathBuf};

use rayon::prelude::*;

use gaitforge_core::formats::{load_manifest_file, load_trial};
use gaitforge_core::{
    make_split, validate_trial, Manifest, MocapFrame, MocapStream, Split, SplitMember, SplitRatios, Subject, Trial,
};
use gaitforge_dsp::{butterworth_lowpass, filtfilt, sync_streams};

use crate::{PipelineError, Result};

/// Mocap force plates are low-passed before use.
pub const GRF_CUTOFF_HZ: f64 = 45.0;
pub const GRF_FILTER_ORDER: usize = 4;

/// A trial together with its estimated insole clock offset
/// (`insole_time = lab_time + offset_us`).
#[derive(Debug, Clone, PartialEq)]
pub struct SyncedTrial {
    pub trial: Trial,
    pub offset_us: i64,
}

impl SyncedTrial {
    /// Converts an insole timestamp to the lab clock, in µs.
    pub fn insole_to_lab(&self, t_us: u64) -> i64 {
        t_us as i64 - self.offset_us
    }
}

fn mocap_rate(mocap: &MocapStream) -> Option<f64> {
    let (a, b) = mocap.span_us()?;
    (mocap.len() > 1 && b > a).then(|| (mocap.len() - 1) as f64 * 1e6 / (b - a) as f64)
}

/// Estimates the insole clock offset of a trial from its insole and mocap
/// vertical forces. The mocap force is zero-phase filtered first. Trials
/// without both streams get offset 0.
pub fn sync_trial(trial: &Trial) -> Result<i64> {
    let (Some(insole), Some(mocap)) = (&trial.insole, &trial.mocap) else {
        return Ok(0);
    };
    let ctx = |what: &str| format!("trial {}: {what}", trial.id);
    let rate = mocap_rate(mocap).ok_or_else(|| PipelineError::Data(ctx("mocap stream too short to sync")))?;
    let filt = butterworth_lowpass(GRF_FILTER_ORDER, GRF_CUTOFF_HZ, rate).map_err(|e| PipelineError::dsp(ctx("GRF filter"), e))?;
    let grf = filtfilt(&mocap.grf_z(), &filt).map_err(|e| PipelineError::dsp(ctx("GRF filter"), e))?;
    let filtered = MocapStream::new(
        mocap
            .frames()
            .iter()
            .zip(grf)
            .map(|(f, g)| MocapFrame { grf_z: g, ..*f })
            .collect(),
    )?;
    sync_streams(insole, &filtered).map_err(|e| PipelineError::dsp(ctx("sync"), e))
}

/// A loaded, validated and synchronized dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub trials: Vec<SyncedTrial>,
}

/// Loads every trial in the manifest under `root` in parallel, validates
/// each against the manifest and estimates its clock offset. Any invalid
/// trial is an error naming it.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let manifest = load_manifest_file(root)?;
    let trials = manifest
        .trials
        .par_iter()
        .map(|entry| {
            let trial = load_trial(root, entry)?;
            let violations = validate_trial(&trial, &manifest);
            if !violations.is_empty() {
                let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                return Err(PipelineError::Data(format!("trial {}: {}", trial.id, list.join(", "))));
            }
            let offset_us = sync_trial(&trial)?;
            Ok(SyncedTrial { trial, offset_us })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        root: root.to_path_buf(),
        manifest,
        trials,
    })
}

impl Dataset {
    pub fn subject(&self, id: &str) -> Option<&Subject> {
        self.manifest.subject(id)
    }

    pub fn split(&self, ratios: SplitRatios, seed: u64) -> Result<Split> {
        Ok(make_split(&self.manifest.subject_ids(), ratios, seed)?)
    }

    /// Trials whose subject belongs to `member` of `split`, in manifest order.
    pub fn trials_in(&self, split: &Split, member: SplitMember) -> Vec<&SyncedTrial> {
        let ids = split.subjects(member);
        self.trials.iter().filter(|t| ids.contains(&t.trial.subject_id)).collect()
    }
}
