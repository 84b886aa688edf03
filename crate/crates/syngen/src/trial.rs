use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use gaitforge_core::{
    Activity, InsoleFrame, InsoleStream, MocapFrame, MocapStream, PoseFrame, PoseStream, Subject, Trial, N_CHANNELS,
};

use crate::pose::{pose_keypoints, Camera};
use crate::{GenError, GenParams, TrialModel};

pub const INSOLE_RATE_HZ: f64 = 82.0;
pub const POSE_RATE_HZ: f64 = 60.0;
pub const MOCAP_RATE_HZ: f64 = 200.0;
/// Largest injected insole clock offset, either sign.
pub const MAX_OFFSET_US: i64 = 300_000;

const INSOLE_NOISE_STREAM: u64 = 1;
const POSE_NOISE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTrial {
    pub trial: Trial,
    /// Insole clock minus lab clock, µs: insole time = lab time + offset.
    pub offset_us: i64,
    pub model: TrialModel,
}

fn timestamps(duration: f64, rate: f64) -> impl Iterator<Item = u64> {
    let n = (duration * rate).round() as u64;
    (0..n).map(move |k| (k as f64 * 1e6 / rate).round() as u64)
}

/// Generates one trial. Pose and mocap run on the lab clock; the insole runs
/// on its own clock shifted by a random offset of up to ±300 ms. Mocap is
/// noise-free: its KAM is the oracle applied to the model's forces and knee
/// angle, and its vertical GRF is the model's total vertical force.
pub fn gen_trial(
    id: &str,
    subject: &Subject,
    activity: Activity,
    duration_s: f64,
    seed: u64,
    params: &GenParams,
) -> Result<GeneratedTrial, GenError> {
    subject.check()?;
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(GenError::Params(format!("invalid duration {duration_s}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = TrialModel::sample(subject, activity, duration_s, params, &mut rng);
    let offset_us = rng.random_range(-MAX_OFFSET_US..=MAX_OFFSET_US);
    let camera = Camera::sample(subject.height, &mut rng);

    let noise = &params.noise;
    let mut insole_rng = ChaCha8Rng::seed_from_u64(seed);
    insole_rng.set_stream(INSOLE_NOISE_STREAM);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let insole_frames = timestamps(duration_s, INSOLE_RATE_HZ)
        .map(|t_us| {
            let clean = model.channels((t_us as i64 - offset_us) as f64 / 1e6);
            let mut channels = [0f32; N_CHANNELS];
            for (out, v) in channels.iter_mut().zip(clean) {
                let rel = noise.insole_rel * unit.sample(&mut insole_rng);
                let abs = noise.insole_abs * unit.sample(&mut insole_rng);
                *out = (v * (1.0 + rel) + abs) as f32;
            }
            InsoleFrame { t_us, channels }
        })
        .collect();
    let insole = InsoleStream::new(INSOLE_RATE_HZ as f32, insole_frames)?;

    let mut pose_rng = ChaCha8Rng::seed_from_u64(seed);
    pose_rng.set_stream(POSE_NOISE_STREAM);
    let pose_frames = timestamps(duration_s, POSE_RATE_HZ)
        .map(|t_us| PoseFrame {
            t_us,
            keypoints: pose_keypoints(&model, &camera, t_us as f64 / 1e6, noise, &mut pose_rng),
        })
        .collect();
    let pose = PoseStream::new(pose_frames)?;

    let mocap_frames = timestamps(duration_s, MOCAP_RATE_HZ)
        .map(|t_us| {
            let t = t_us as f64 / 1e6;
            MocapFrame {
                t_us,
                kam: model.kam(t),
                knee_angle: model.knee_angle(t),
                grf_z: model.total_vertical_force(t),
            }
        })
        .collect();
    let mocap = MocapStream::new(mocap_frames)?;

    Ok(GeneratedTrial {
        trial: Trial {
            id: id.to_string(),
            subject_id: subject.id.clone(),
            activity,
            insole: Some(insole),
            pose: Some(pose),
            mocap: Some(mocap),
        },
        offset_us,
        model,
    })
}
