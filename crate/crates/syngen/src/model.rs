use std::f64::consts::PI;

use rand::Rng;

use gaitforge_core::stream::{channel_index, Axis, Sensor, N_CHANNELS};
use gaitforge_core::{Activity, Subject};

use crate::{kam_oracle, GenParams};

/// Mean of the stance shape `1.1·sin(πu) + 0.25·sin(3πu)` over `u ∈ [0, 1]`.
/// Dividing by it makes each stance's vertical impulse equal BW × stance time.
pub const STANCE_SHAPE_MEAN: f64 = 2.2 / PI + 0.5 / (3.0 * PI);

const SHEAR_RATIO: f64 = 0.08;
/// Sensor moments per newton of local vertical force, N·mm/N.
const MOMENT_ARM_MM: f64 = 0.5;
const SHEAR_RANGE_N: f64 = 20.0;
const STANDING_ANGLE: f64 = 5.0;

fn stance_shape(u: f64) -> f64 {
    (1.1 * (PI * u).sin() + 0.25 * (3.0 * PI * u).sin()) / STANCE_SHAPE_MEAN
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Compresses values beyond ±20 N with a tanh knee instead of clipping.
fn soft_clip(v: f64) -> f64 {
    if v.abs() <= SHEAR_RANGE_N {
        v
    } else {
        v.signum() * (SHEAR_RANGE_N + SHEAR_RANGE_N * ((v.abs() - SHEAR_RANGE_N) / SHEAR_RANGE_N).tanh())
    }
}

/// Continuous-time description of one trial on the lab clock, in seconds.
/// All emitted streams are samples of these functions.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialModel {
    pub activity: Activity,
    /// Newtons.
    pub body_weight: f64,
    /// Meters.
    pub height: f64,
    /// Stride period and stance fraction (locomotion).
    pub period: f64,
    pub stance_fraction: f64,
    /// Time of a right-foot contact.
    pub first_contact: f64,
    /// Stride-to-stride timing variability: the gait cycle count is advanced
    /// by `jitter_amp · sin(2π·jitter_freq·t + jitter_phase)` cycles, so
    /// successive strides differ in length by a few percent.
    pub jitter_amp: f64,
    pub jitter_freq: f64,
    pub jitter_phase: f64,
    /// Midpoint and steepness (1/s) of the sit/stand transition.
    pub ramp_center: f64,
    pub ramp_rate: f64,
    /// Knee flexion while seated, degrees.
    pub seated_angle: f64,
    pub sway_amp: f64,
    pub sway_freq: [f64; 3],
    pub sway_phase: [f64; 3],
    pub saturate: bool,
}

impl TrialModel {
    /// Draws the per-trial parameters; the order of draws is fixed.
    pub fn sample(subject: &Subject, activity: Activity, duration: f64, params: &GenParams, rng: &mut impl Rng) -> Self {
        let (period, stance_fraction) = match activity {
            Activity::Walk => (
                rng.random_range(params.walk_stride_s.0..=params.walk_stride_s.1),
                rng.random_range(0.58..0.62),
            ),
            Activity::Run => (
                rng.random_range(params.run_stride_s.0..=params.run_stride_s.1),
                rng.random_range(0.35..0.41),
            ),
            _ => (1.0, 1.0),
        };
        let first_contact = rng.random_range(0.0..period);
        let jitter_amp = rng.random_range(0.015..0.03);
        let jitter_freq = rng.random_range(0.15..0.35);
        let jitter_phase = rng.random_range(0.0..2.0 * PI);
        let ramp_center = duration / 2.0 + rng.random_range(-0.15..0.15);
        let ramp_rate = rng.random_range(3.6..4.6);
        let seated_angle = rng.random_range(80.0..100.0);
        let sway_amp = params.noise.sway * rng.random_range(0.5..1.5);
        let sway_freq = [rng.random_range(0.2..0.5), rng.random_range(0.8..1.6), rng.random_range(2.5..4.0)];
        let sway_phase = [(); 3].map(|_| rng.random_range(0.0..2.0 * PI));
        Self {
            activity,
            body_weight: subject.body_weight(),
            height: subject.height,
            period,
            stance_fraction,
            first_contact,
            jitter_amp,
            jitter_freq,
            jitter_phase,
            ramp_center,
            ramp_rate,
            seated_angle,
            sway_amp,
            sway_freq,
            sway_phase,
            saturate: params.saturate,
        }
    }

    fn jitter(&self, t: f64) -> f64 {
        self.jitter_amp * (2.0 * PI * self.jitter_freq * t + self.jitter_phase).sin()
    }

    /// Gait cycles completed since `first_contact`; strictly increasing.
    pub fn cycles(&self, t: f64) -> f64 {
        (t - self.first_contact) / self.period + self.jitter(t) - self.jitter(self.first_contact)
    }

    /// Right-foot gait phase in [0, 1), zero at foot contact.
    pub fn gait_phase(&self, t: f64) -> f64 {
        self.cycles(t).rem_euclid(1.0)
    }

    /// Right-foot contact times within `[from, to]`, to about a nanosecond.
    pub fn contacts(&self, from: f64, to: f64) -> Vec<f64> {
        let first = self.cycles(from).ceil() as i64;
        let last = self.cycles(to).floor() as i64;
        (first..=last)
            .map(|k| {
                // Contact k lies within one maximal period swing of its nominal time.
                let nominal = self.first_contact + k as f64 * self.period;
                let (mut lo, mut hi) = (nominal - self.period, nominal + self.period);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.cycles(mid) < k as f64 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    /// Standing fraction of a sit/stand trial: 0 seated, 1 upright.
    pub fn standing(&self, t: f64) -> f64 {
        let s = logistic(self.ramp_rate * (t - self.ramp_center));
        match self.activity {
            Activity::StandToSit => 1.0 - s,
            _ => s,
        }
    }

    fn sway(&self, t: f64) -> f64 {
        // Slow postural drift plus a faster corrective component.
        [0.5, 0.3, 0.2]
            .iter()
            .zip(self.sway_freq.iter().zip(&self.sway_phase))
            .map(|(w, (f, p))| w * (2.0 * PI * f * t + p).sin())
            .sum()
    }

    /// Stance progress `u` if the right foot is loaded through a stance at `t`.
    fn stance_u(&self, t: f64) -> Option<f64> {
        let phase = self.gait_phase(t);
        (phase < self.stance_fraction).then(|| phase / self.stance_fraction)
    }

    /// Total vertical force under the right foot and the load-distribution
    /// parameter in [0, 1] (heel-loaded at 0, forefoot-loaded at 1).
    fn vertical_load(&self, t: f64) -> (f64, f64) {
        let bw = self.body_weight;
        match self.activity {
            Activity::Walk | Activity::Run => match self.stance_u(t) {
                Some(u) => (bw * stance_shape(u), u),
                None => (0.0, 0.0),
            },
            Activity::SitToStand | Activity::StandToSit => {
                let st = self.standing(t);
                let f = bw * (0.12 + 0.38 * st + 0.15 * (PI * st).sin() + self.sway_amp * st * self.sway(t));
                (f.max(0.0), 0.3 + 0.4 * st)
            }
            Activity::Null => {
                let sw = self.sway(t);
                ((bw * (0.5 + self.sway_amp * sw)).max(0.0), 0.45 + 1.5 * self.sway_amp * sw)
            }
        }
    }

    /// Total vertical force under the right foot, N.
    pub fn total_vertical_force(&self, t: f64) -> f64 {
        self.vertical_load(t).0
    }

    /// Noise-free insole channels at `t`, sensor-major, N and N·mm.
    pub fn channels(&self, t: f64) -> [f64; N_CHANNELS] {
        let (fz, u) = self.vertical_load(t);
        let m = 0.1 * (2.0 * PI * u).sin();
        let balls = 0.55 + 0.15 * u;
        let fractions = [
            (Sensor::Toe, 0.30 * u),
            (Sensor::MedialBall, balls * (1.0 / 3.0 + m)),
            (Sensor::CentralBall, balls / 3.0),
            (Sensor::LateralBall, balls * (1.0 / 3.0 - m)),
            (Sensor::Heel, 0.45 * (1.0 - u)),
        ];
        // Anterior-posterior shear turns from braking to propulsion over stance
        // in locomotion; medial-lateral shear keeps an activity-specific sign.
        let (ap, ml) = match self.activity {
            Activity::Walk => (-(PI * u).cos(), 1.0),
            Activity::Run => (-(PI * u).cos(), -1.0),
            Activity::SitToStand => (1.0, 1.0),
            Activity::StandToSit => (-1.0, 1.0),
            Activity::Null => (0.5, -0.5),
        };
        let mut ch = [0.0; N_CHANNELS];
        for (sensor, frac) in fractions {
            let local = fz * frac;
            let mut fx = SHEAR_RATIO * ap * local;
            let mut fy = SHEAR_RATIO * ml * local;
            if self.saturate {
                fx = soft_clip(fx);
                fy = soft_clip(fy);
            }
            ch[channel_index(sensor, Axis::Fx)] = fx;
            ch[channel_index(sensor, Axis::Fy)] = fy;
            ch[channel_index(sensor, Axis::Fz)] = local;
            ch[channel_index(sensor, Axis::Mx)] = MOMENT_ARM_MM * local;
            ch[channel_index(sensor, Axis::My)] = -MOMENT_ARM_MM * local;
            ch[channel_index(sensor, Axis::Mz)] = MOMENT_ARM_MM * local;
        }
        ch
    }

    fn locomotion_knee(&self, phase: f64) -> f64 {
        let walk = 15.0 + 25.0 * (2.0 * PI * phase + 0.4).sin();
        if self.activity == Activity::Run {
            1.6 * walk
        } else {
            walk
        }
    }

    fn knee_at_phase_offset(&self, t: f64, offset: f64) -> f64 {
        match self.activity {
            Activity::Walk | Activity::Run => self.locomotion_knee((self.gait_phase(t) + offset).rem_euclid(1.0)),
            Activity::SitToStand | Activity::StandToSit => {
                self.seated_angle + (STANDING_ANGLE - self.seated_angle) * self.standing(t)
            }
            Activity::Null => STANDING_ANGLE + 20.0 * self.sway_amp * self.sway(t),
        }
    }

    /// Right knee flexion, degrees.
    pub fn knee_angle(&self, t: f64) -> f64 {
        self.knee_at_phase_offset(t, 0.0)
    }

    pub fn knee_angle_left(&self, t: f64) -> f64 {
        self.knee_at_phase_offset(t, 0.5)
    }

    /// Hip flexion (thigh forward of vertical), degrees.
    pub fn hip_flexion(&self, t: f64, left: bool) -> f64 {
        let offset = if left { 0.5 } else { 0.0 };
        match self.activity {
            Activity::Walk => 8.0 + 22.0 * (2.0 * PI * (self.gait_phase(t) + offset) + 1.9).sin(),
            Activity::Run => 12.0 + 33.0 * (2.0 * PI * (self.gait_phase(t) + offset) + 1.9).sin(),
            Activity::SitToStand | Activity::StandToSit => self.seated_angle * (1.0 - self.standing(t)),
            Activity::Null => 1.0 + 15.0 * self.sway_amp * self.sway(t),
        }
    }

    /// Forward trunk lean, degrees.
    pub fn trunk_lean(&self, t: f64) -> f64 {
        match self.activity {
            Activity::Walk => 5.0,
            Activity::Run => 12.0,
            Activity::SitToStand | Activity::StandToSit => 5.0 + 35.0 * (PI * self.standing(t)).sin(),
            Activity::Null => 3.0 + 10.0 * self.sway_amp * self.sway(t),
        }
    }

    /// Ground-truth knee adduction moment, N·m.
    pub fn kam(&self, t: f64) -> f64 {
        kam_oracle(&self.channels(t), self.knee_angle(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaitforge_core::{kam_to_pct_bwht, Sex};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(activity: Activity, seed: u64) -> TrialModel {
        let s = Subject::new("a", Sex::F, 23.0, 1.689, 65.6).unwrap();
        TrialModel::sample(&s, activity, 5.0, &GenParams::default(), &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn stance_impulse_equals_body_weight_times_stance() {
        for act in [Activity::Walk, Activity::Run] {
            let m = model(act, 3);
            let contacts = m.contacts(0.0, 10.0);
            for w in contacts.windows(2) {
                let n = 20_000;
                let dt = (w[1] - w[0]) / n as f64;
                let mut impulse = 0.0;
                let mut stance = 0.0;
                for k in 0..n {
                    let f = m.total_vertical_force(w[0] + (k as f64 + 0.5) * dt);
                    impulse += f * dt;
                    stance += if f > 0.0 { dt } else { 0.0 };
                }
                let expected = m.body_weight * stance;
                assert!((impulse / expected - 1.0).abs() < 0.02, "{act}: {impulse} vs {expected}");
            }
        }
    }

    #[test]
    fn stride_lengths_vary_a_little() {
        for act in [Activity::Walk, Activity::Run] {
            let m = model(act, 6);
            let c = m.contacts(0.0, 30.0);
            let d: Vec<f64> = c.windows(2).map(|w| w[1] - w[0]).collect();
            let (lo, hi) = d.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            assert!(hi / lo > 1.03 && hi / lo < 1.5, "{act}: {lo} {hi}");
            for t in &c {
                assert!(m.gait_phase(*t) < 1e-6 || m.gait_phase(*t) > 1.0 - 1e-6);
            }
        }
    }

    #[test]
    fn sensor_forces_sum_to_total() {
        for act in Activity::ALL {
            let m = model(act, 5);
            for k in 0..500 {
                let t = k as f64 * 0.01;
                let ch = m.channels(t);
                let sum: f64 = Sensor::ALL.iter().map(|&s| ch[channel_index(s, Axis::Fz)]).sum();
                assert!((sum - m.total_vertical_force(t)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn running_has_flight() {
        let m = model(Activity::Run, 1);
        let zero = (0..1000).filter(|k| m.total_vertical_force(*k as f64 * 0.005) == 0.0).count();
        assert!(zero > 100);
    }

    #[test]
    fn peak_walking_kam_near_three_percent() {
        let s = Subject::new("a", Sex::F, 23.0, 1.689, 65.6).unwrap();
        let m = model(Activity::Walk, 2);
        let peak = (0..5000).map(|k| m.kam(k as f64 * 0.001)).fold(f64::MIN, f64::max);
        let pct = kam_to_pct_bwht(peak, &s);
        assert!((2.7..3.3).contains(&pct), "{pct}");
    }

    #[test]
    fn quiet_standing() {
        let m = model(Activity::Null, 9);
        for k in 0..100 {
            let t = k as f64 * 0.05;
            assert!((m.total_vertical_force(t) / m.body_weight - 0.5).abs() < 0.1);
            assert!((m.knee_angle(t) - 5.0).abs() < 2.0);
        }
    }

    #[test]
    fn sit_stand_ramps() {
        let sts = model(Activity::SitToStand, 4);
        assert!((sts.knee_angle(0.0) - sts.seated_angle).abs() < 1.0);
        assert!((sts.knee_angle(5.0) - 5.0).abs() < 1.0);
        let stst = model(Activity::StandToSit, 4);
        assert!((stst.knee_angle(0.0) - 5.0).abs() < 1.0);
        assert!((stst.knee_angle(5.0) - stst.seated_angle).abs() < 1.0);
    }

    #[test]
    fn soft_clip_is_monotone_and_bounded() {
        let mut prev = f64::MIN;
        for k in -1000..1000 {
            let v = soft_clip(k as f64 * 0.1);
            assert!(v >= prev && v.abs() < 40.0);
            prev = v;
        }
        assert_eq!(soft_clip(12.5), 12.5);
    }
}
