use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use gaitforge_core::{Activity, Keypoint, KeypointId, N_KEYPOINTS};

use crate::{NoiseParams, TrialModel};

// Segment lengths as fractions of standing height.
const THIGH: f64 = 0.245;
const SHANK: f64 = 0.246;
const TRUNK: f64 = 0.30;
const UPPER_ARM: f64 = 0.186;
const FOREARM: f64 = 0.146;
const FOOT: f64 = 0.15;
const ANKLE_HEIGHT: f64 = 0.039;
/// Fraction of the frame height taken by a standing subject.
const FRAME_FILL: f64 = 0.6;

/// Per-trial camera placement: world meters to normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Camera {
    /// Normalized units per meter.
    scale: f64,
    /// Image position of the world origin (floor under the ankle).
    cx: f64,
    cy: f64,
}

impl Camera {
    pub(crate) fn sample(height: f64, rng: &mut impl Rng) -> Self {
        Self {
            scale: FRAME_FILL / height * rng.random_range(0.9..1.1),
            cx: rng.random_range(0.4..0.6),
            cy: rng.random_range(0.78..0.85),
        }
    }

    fn project(&self, p: [f64; 2]) -> (f64, f64) {
        (self.cx + self.scale * p[0], self.cy - self.scale * p[1])
    }
}

fn add(p: [f64; 2], len: f64, angle_deg: f64, down: bool) -> [f64; 2] {
    let a = angle_deg.to_radians();
    if down {
        [p[0] + len * a.sin(), p[1] - len * a.cos()]
    } else {
        [p[0] + len * a.sin(), p[1] + len * a.cos()]
    }
}

struct Leg {
    hip: [f64; 2],
    knee: [f64; 2],
    ankle: [f64; 2],
    toe: [f64; 2],
}

/// Leg chain hanging from the hip. `hip_flex` is the thigh angle forward of
/// vertical and `knee` the included flexion, both in degrees.
fn leg_from_hip(hip: [f64; 2], h: f64, hip_flex: f64, knee: f64) -> Leg {
    let knee_p = add(hip, THIGH * h, hip_flex, true);
    let shank = hip_flex - knee;
    let ankle = add(knee_p, SHANK * h, shank, true);
    let toe = add(ankle, FOOT * h, shank + 90.0, true);
    Leg { hip, knee: knee_p, ankle, toe }
}

/// Same chain built upward from a planted ankle.
fn leg_from_ankle(ankle: [f64; 2], h: f64, hip_flex: f64, knee: f64) -> Leg {
    let shank = (hip_flex - knee).to_radians();
    let thigh = hip_flex.to_radians();
    let knee_p = [ankle[0] - SHANK * h * shank.sin(), ankle[1] + SHANK * h * shank.cos()];
    let hip = [knee_p[0] - THIGH * h * thigh.sin(), knee_p[1] + THIGH * h * thigh.cos()];
    let toe = add(ankle, FOOT * h, (hip_flex - knee) + 90.0, true);
    Leg { hip, knee: knee_p, ankle, toe }
}

/// Noise-free world-frame skeleton at time `t`: keypoints in meters,
/// x forward, y up, indexed like [`KeypointId`].
pub(crate) fn skeleton(model: &TrialModel, t: f64) -> [[f64; 2]; N_KEYPOINTS] {
    let h = model.height;
    let leg_len = (THIGH + SHANK + ANKLE_HEIGHT) * h;
    let (right, left) = match model.activity {
        Activity::Walk | Activity::Run => {
            let phase = model.gait_phase(t);
            let bob = if model.activity == Activity::Run { 0.05 } else { 0.02 };
            let hip = [0.0, leg_len - 0.03 + bob * (4.0 * PI * phase).cos()];
            (
                leg_from_hip(hip, h, model.hip_flexion(t, false), model.knee_angle(t)),
                leg_from_hip(hip, h, model.hip_flexion(t, true), model.knee_angle_left(t)),
            )
        }
        _ => {
            let ankle = [0.0, ANKLE_HEIGHT * h];
            let right = leg_from_ankle(ankle, h, model.hip_flexion(t, false), model.knee_angle(t));
            let left = Leg {
                hip: right.hip,
                knee: [right.knee[0] + 0.01, right.knee[1]],
                ankle: [ankle[0] + 0.01, ankle[1]],
                toe: [right.toe[0] + 0.01, right.toe[1]],
            };
            (right, left)
        }
    };
    let lean = model.trunk_lean(t);
    let shoulder = add(right.hip, TRUNK * h, lean, false);
    // Arms swing against the ipsilateral leg; elbows bend more when running.
    let (swing, elbow) = match model.activity {
        Activity::Walk => (20.0 * (2.0 * PI * model.gait_phase(t) + 1.9).sin(), 20.0),
        Activity::Run => (35.0 * (2.0 * PI * model.gait_phase(t) + 1.9).sin(), 90.0),
        Activity::SitToStand | Activity::StandToSit => (0.0, 10.0 + 0.8 * (lean - 5.0)),
        Activity::Null => (2.0, 10.0),
    };
    let arm = |sign: f64| {
        let upper = -sign * swing + 0.5 * lean;
        let e = add(shoulder, UPPER_ARM * h, upper, true);
        let w = add(e, FOREARM * h, upper + elbow, true);
        (e, w)
    };
    let (re, rw) = arm(1.0);
    let (le, lw) = arm(-1.0);

    let mut out = [[0.0; 2]; N_KEYPOINTS];
    let mut set = |id: KeypointId, p: [f64; 2]| out[id as usize] = p;
    set(KeypointId::LeftShoulder, [shoulder[0] + 0.01, shoulder[1]]);
    set(KeypointId::RightShoulder, shoulder);
    set(KeypointId::LeftElbow, le);
    set(KeypointId::RightElbow, re);
    set(KeypointId::LeftWrist, lw);
    set(KeypointId::RightWrist, rw);
    set(KeypointId::LeftHip, left.hip);
    set(KeypointId::RightHip, right.hip);
    set(KeypointId::LeftKnee, left.knee);
    set(KeypointId::RightKnee, right.knee);
    set(KeypointId::LeftAnkle, left.ankle);
    set(KeypointId::RightAnkle, right.ankle);
    set(KeypointId::LeftFootIndex, left.toe);
    set(KeypointId::RightFootIndex, right.toe);
    out
}

fn is_left(idx: usize) -> bool {
    idx.is_multiple_of(2)
}

/// Projected keypoints with detector noise. The camera sees the subject's
/// right side, so left-side joints sit further away and are less visible.
pub(crate) fn pose_keypoints(
    model: &TrialModel,
    camera: &Camera,
    t: f64,
    noise: &NoiseParams,
    rng: &mut impl Rng,
) -> [Keypoint; N_KEYPOINTS] {
    let world = skeleton(model, t);
    let xy = Normal::new(0.0, noise.pose_xy).expect("finite noise");
    let z = Normal::new(0.0, noise.pose_z).expect("finite noise");
    let mut out = [Keypoint::default(); N_KEYPOINTS];
    for (idx, (kp, p)) in out.iter_mut().zip(world.iter()).enumerate() {
        let (x, y) = camera.project(*p);
        let depth = if is_left(idx) { 0.05 } else { -0.05 };
        let v = if is_left(idx) {
            rng.random_range(0.6..0.95)
        } else {
            rng.random_range(0.85..1.0)
        };
        *kp = Keypoint {
            x: x + xy.sample(rng),
            y: y + xy.sample(rng),
            z: depth + z.sample(rng),
            v,
        };
    }
    out
}
