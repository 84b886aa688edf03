#![allow(dead_code)]

use std::path::Path;

use gaitforge_core::{
    Activity, InsoleFrame, InsoleStream, Keypoint, PoseFrame, PoseStream, Sex, Subject, Trial, N_CHANNELS, N_KEYPOINTS,
};
use gaitforge_pipeline::{load_dataset, Dataset, SyncedTrial};
use gaitforge_syngen::{gen_dataset, gen_trial, GenParams, GeneratedTrial, TrialCounts};

pub fn subject(id: &str) -> Subject {
    Subject::new(id, Sex::F, 30.0, 1.70, 65.0).unwrap()
}

/// A generated trial paired with its true clock offset.
pub fn synced(activity: Activity, duration: f64, seed: u64) -> (SyncedTrial, GeneratedTrial) {
    let g = gen_trial("T", &subject("S000"), activity, duration, seed, &GenParams::default()).unwrap();
    let st = SyncedTrial {
        trial: g.trial.clone(),
        offset_us: g.offset_us,
    };
    (st, g)
}

pub fn pose_only_trial(id: &str, subject: &str, activity: Activity, frames: usize, rate: f64) -> SyncedTrial {
    let frames = (0..frames)
        .map(|k| PoseFrame {
            t_us: (k as f64 * 1e6 / rate).round() as u64,
            keypoints: [Keypoint { x: 0.5, y: 0.5, z: 0.0, v: 1.0 }; N_KEYPOINTS],
        })
        .collect();
    SyncedTrial {
        trial: Trial {
            id: id.into(),
            subject_id: subject.into(),
            activity,
            insole: None,
            pose: Some(PoseStream::new(frames).unwrap()),
            mocap: None,
        },
        offset_us: 0,
    }
}

pub fn insole_only_trial(id: &str, subject: &str, activity: Activity, frames: usize, offset_us: i64) -> SyncedTrial {
    let frames = (0..frames)
        .map(|k| InsoleFrame {
            t_us: (k as f64 * 1e6 / 82.0).round() as u64,
            channels: [k as f32; N_CHANNELS],
        })
        .collect();
    SyncedTrial {
        trial: Trial {
            id: id.into(),
            subject_id: subject.into(),
            activity,
            insole: Some(InsoleStream::new(82.0, frames).unwrap()),
            pose: None,
            mocap: None,
        },
        offset_us,
    }
}

/// Small generated dataset: few subjects, short trials.
pub fn small_params(seed: u64, n_subjects: usize) -> GenParams {
    GenParams {
        seed,
        n_subjects,
        trials: TrialCounts {
            walk: 1,
            run: 1,
            sit_to_stand: 1,
            stand_to_sit: 1,
            null: 1,
        },
        walk_duration_s: 4.0,
        run_duration_s: 3.0,
        null_duration_s: 3.0,
        ..GenParams::default()
    }
}

pub fn small_dataset(root: &Path, seed: u64, n_subjects: usize) -> Dataset {
    gen_dataset(&small_params(seed, n_subjects), root).unwrap();
    load_dataset(root).unwrap()
}
