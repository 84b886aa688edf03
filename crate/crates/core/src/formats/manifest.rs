use std::collections::HashSet;

use super::FormatError;
use crate::Manifest;

/// Parse a manifest and check referential integrity (unique ids, every trial
/// pointing at a known subject, valid demographics).
pub fn read_manifest(text: &str) -> Result<Manifest, FormatError> {
    let manifest: Manifest = serde_json::from_str(text)?;
    let mut subjects = HashSet::new();
    for s in &manifest.subjects {
        s.check()?;
        if !subjects.insert(s.id.as_str()) {
            return Err(FormatError::Duplicate {
                kind: "subject",
                id: s.id.clone(),
            });
        }
    }
    let mut trials = HashSet::new();
    for t in &manifest.trials {
        if !trials.insert(t.id.as_str()) {
            return Err(FormatError::Duplicate {
                kind: "trial",
                id: t.id.clone(),
            });
        }
        if !subjects.contains(t.subject_id.as_str()) {
            return Err(FormatError::UnknownSubject {
                trial: t.id.clone(),
                subject: t.subject_id.clone(),
            });
        }
    }
    Ok(manifest)
}

pub fn write_manifest(manifest: &Manifest) -> String {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    text
}
