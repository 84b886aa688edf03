use std::fs;
use std::path::Path;

use super::{read_insole, read_manifest, read_mocap_csv, read_pose_csv, FormatError};
use crate::{Manifest, Trial, TrialEntry};

fn read_bytes(path: &Path) -> Result<Vec<u8>, FormatError> {
    fs::read(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read `manifest.json` from a dataset root.
pub fn load_manifest_file(root: &Path) -> Result<Manifest, FormatError> {
    let path = root.join("manifest.json");
    read_manifest(&read_text(&path)?).map_err(|e| e.in_file(path.display().to_string()))
}

/// Load every stream referenced by a manifest entry. Errors name the file.
pub fn load_trial(root: &Path, entry: &TrialEntry) -> Result<Trial, FormatError> {
    let insole = match &entry.insole {
        Some(r) => {
            let path = root.join(&r.path);
            Some(read_insole(&read_bytes(&path)?).map_err(|e| e.in_file(path.display().to_string()))?)
        }
        None => None,
    };
    let pose = match &entry.pose {
        Some(r) => {
            let path = root.join(&r.path);
            Some(read_pose_csv(&read_text(&path)?).map_err(|e| e.in_file(path.display().to_string()))?)
        }
        None => None,
    };
    let mocap = match &entry.mocap {
        Some(r) => {
            let path = root.join(&r.path);
            Some(read_mocap_csv(&read_text(&path)?).map_err(|e| e.in_file(path.display().to_string()))?)
        }
        None => None,
    };
    Ok(Trial {
        id: entry.id.clone(),
        subject_id: entry.subject_id.clone(),
        activity: entry.activity,
        insole,
        pose,
        mocap,
    })
}
