use gaitforge_core::stream::{channel_index, Axis, Sensor, N_CHANNELS};

/// Medial-lateral lever arm applied to the ball-sensor load imbalance.
pub const KAM_LEVER_ARM_M: f64 = 0.04;
/// Knee-angle contribution, N·m per degree of flexion above 5°.
pub const KAM_ANGLE_COEF: f64 = 0.02;
/// Common scale on both terms, chosen so that peak walking KAM of an average
/// subject is about 3 %BW*ht.
pub const KAM_SCALE: f64 = 7.0;

/// Closed-form knee adduction moment in N·m from the 30 insole channels
/// (sensor-major, forces in N) and the knee flexion angle in degrees:
///
/// ```text
/// L   = 0.04 m · (Fz_medial − Fz_lateral) / max(Fz_total, 1 N)
/// KAM = k · (Fz_total · L + 0.02 · (angle − 5°))
/// ```
pub fn kam_oracle(channels: &[f64; N_CHANNELS], knee_angle_deg: f64) -> f64 {
    let fz = |s| channels[channel_index(s, Axis::Fz)];
    let total: f64 = Sensor::ALL.iter().map(|&s| fz(s)).sum();
    let lever = KAM_LEVER_ARM_M * (fz(Sensor::MedialBall) - fz(Sensor::LateralBall)) / total.max(1.0);
    KAM_SCALE * (total * lever + KAM_ANGLE_COEF * (knee_angle_deg - 5.0))
}
