use crate::Subject;

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Knee adduction moment in N·m expressed as percent of body weight × height.
pub fn kam_to_pct_bwht(kam_nm: f64, subject: &Subject) -> f64 {
    kam_nm / (subject.mass * STANDARD_GRAVITY * subject.height) * 100.0
}
