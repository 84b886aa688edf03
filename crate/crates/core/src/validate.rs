use std::fmt;

use crate::{Manifest, Trial};

/// Minimum pairwise overlap between two streams of the same trial.
pub const MIN_OVERLAP_US: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownSubject(String),
    InvalidSubject(String),
    NoStreams,
    EmptyStream(&'static str),
    InsufficientOverlap {
        a: &'static str,
        b: &'static str,
        overlap_us: i64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownSubject(id) => write!(f, "unknown subject ({id})"),
            Violation::InvalidSubject(why) => write!(f, "invalid subject ({why})"),
            Violation::NoStreams => f.write_str("no streams"),
            Violation::EmptyStream(name) => write!(f, "empty stream ({name})"),
            Violation::InsufficientOverlap { a, b, overlap_us } => write!(
                f,
                "insufficient overlap ({a}/{b}: {:.3} s)",
                *overlap_us as f64 / 1e6
            ),
        }
    }
}

/// Check a loaded trial against the manifest. Violations are data: an empty
/// list means the trial is usable.
pub fn validate_trial(trial: &Trial, manifest: &Manifest) -> Vec<Violation> {
    let mut out = Vec::new();
    match manifest.subject(&trial.subject_id) {
        None => out.push(Violation::UnknownSubject(trial.subject_id.clone())),
        Some(s) => {
            if let Err(e) = s.check() {
                out.push(Violation::InvalidSubject(e.to_string()));
            }
        }
    }
    if trial.stream_count() == 0 {
        out.push(Violation::NoStreams);
        return out;
    }
    if trial.insole.as_ref().is_some_and(|s| s.is_empty()) {
        out.push(Violation::EmptyStream("insole"));
    }
    if trial.pose.as_ref().is_some_and(|s| s.is_empty()) {
        out.push(Violation::EmptyStream("pose"));
    }
    if trial.mocap.as_ref().is_some_and(|s| s.is_empty()) {
        out.push(Violation::EmptyStream("mocap"));
    }
    let spans = trial.spans();
    for (i, &(a, a0, a1)) in spans.iter().enumerate() {
        for &(b, b0, b1) in &spans[i + 1..] {
            let overlap_us = a1.min(b1) as i64 - a0.max(b0) as i64;
            if overlap_us < MIN_OVERLAP_US as i64 {
                out.push(Violation::InsufficientOverlap { a, b, overlap_us });
            }
        }
    }
    out
}
