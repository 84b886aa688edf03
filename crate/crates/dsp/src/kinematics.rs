use crate::DspError;

const MIN_SEGMENT: f64 = 1e-6;

/// Knee flexion in degrees: 180° minus the interior angle at the knee between
/// the thigh (knee→hip) and shank (knee→ankle). Points may be 2-D or 3-D.
pub fn knee_angle(hip: &[f64], knee: &[f64], ankle: &[f64]) -> Result<f64, DspError> {
    let dim = knee.len();
    if !(dim == 2 || dim == 3) || hip.len() != dim || ankle.len() != dim {
        return Err(DspError::BadDimension);
    }
    let mut thigh = [0.0; 3];
    let mut shank = [0.0; 3];
    for i in 0..dim {
        thigh[i] = hip[i] - knee[i];
        shank[i] = ankle[i] - knee[i];
    }
    let norm = |v: &[f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm(&thigh) <= MIN_SEGMENT || norm(&shank) <= MIN_SEGMENT {
        return Err(DspError::DegeneratePoints);
    }
    let dot = thigh[0] * shank[0] + thigh[1] * shank[1] + thigh[2] * shank[2];
    let cross = [
        thigh[1] * shank[2] - thigh[2] * shank[1],
        thigh[2] * shank[0] - thigh[0] * shank[2],
        thigh[0] * shank[1] - thigh[1] * shank[0],
    ];
    // atan2 stays accurate near 0° and 180°, unlike acos of the cosine.
    let interior = norm(&cross).atan2(dot).to_degrees();
    Ok((180.0 - interior).clamp(0.0, 180.0))
}
