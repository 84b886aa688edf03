use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use gaitforge_core::formats::{write_insole, write_manifest, write_mocap_csv, write_pose_csv};
use gaitforge_core::{Activity, Manifest, StreamRef, TrialEntry};

use crate::{gen_subject, gen_trial, GenError, GenParams, INSOLE_RATE_HZ, MOCAP_RATE_HZ, POSE_RATE_HZ};

/// Injected insole clock offsets (µs) keyed by trial id, next to the manifest.
pub const OFFSETS_FILE: &str = "offsets.json";

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub manifest: Manifest,
    pub offsets: BTreeMap<String, i64>,
}

/// Per-trial seed derived from the dataset seed and the trial id, so that a
/// trial does not change when others are added or removed.
pub fn trial_seed(seed: u64, trial_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(trial_id.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> GenError + '_ {
    move |source| GenError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), GenError> {
    fs::write(path, bytes).map_err(io_err(path))
}

/// Generates the full dataset under `root`: `manifest.json`, `offsets.json`
/// and one file per stream in `insole/`, `pose/` and `mocap/`. Output is a
/// pure function of `params`.
pub fn gen_dataset(params: &GenParams, root: &Path) -> Result<GeneratedDataset, GenError> {
    params.validate()?;
    for dir in ["insole", "pose", "mocap"] {
        let d = root.join(dir);
        fs::create_dir_all(&d).map_err(io_err(&d))?;
    }
    let subjects: Vec<_> = (0..params.n_subjects).map(|i| gen_subject(params.seed, i)).collect();
    let mut jobs = Vec::new();
    for (si, subject) in subjects.iter().enumerate() {
        for activity in Activity::ALL {
            for k in 1..=params.trials.get(activity) {
                jobs.push((si, activity, format!("{}_{}_{k:02}", subject.id, activity.short_name())));
            }
        }
    }
    let results: Vec<Result<(TrialEntry, i64), GenError>> = jobs
        .par_iter()
        .map(|(si, activity, id)| {
            let subject = &subjects[*si];
            let g = gen_trial(
                id,
                subject,
                *activity,
                params.duration_s(*activity),
                trial_seed(params.seed, id),
                params,
            )?;
            let insole_rel = format!("insole/{id}.vsin");
            let pose_rel = format!("pose/{id}.csv");
            let mocap_rel = format!("mocap/{id}.csv");
            let t = &g.trial;
            write_file(&root.join(&insole_rel), &write_insole(t.insole.as_ref().expect("generated"))?)?;
            write_file(&root.join(&pose_rel), write_pose_csv(t.pose.as_ref().expect("generated")).as_bytes())?;
            write_file(&root.join(&mocap_rel), write_mocap_csv(t.mocap.as_ref().expect("generated")).as_bytes())?;
            let entry = TrialEntry {
                id: id.clone(),
                subject_id: subject.id.clone(),
                activity: *activity,
                insole: Some(StreamRef { path: insole_rel, rate_hz: INSOLE_RATE_HZ }),
                pose: Some(StreamRef { path: pose_rel, rate_hz: POSE_RATE_HZ }),
                mocap: Some(StreamRef { path: mocap_rel, rate_hz: MOCAP_RATE_HZ }),
            };
            Ok((entry, g.offset_us))
        })
        .collect();
    let mut trials = Vec::with_capacity(results.len());
    let mut offsets = BTreeMap::new();
    for r in results {
        let (entry, offset) = r?;
        offsets.insert(entry.id.clone(), offset);
        trials.push(entry);
    }
    let manifest = Manifest { subjects, trials };
    write_file(&root.join("manifest.json"), write_manifest(&manifest).as_bytes())?;
    let offsets_json = serde_json::to_string_pretty(&offsets)?;
    write_file(&root.join(OFFSETS_FILE), offsets_json.as_bytes())?;
    Ok(GeneratedDataset { manifest, offsets })
}

pub fn read_offsets(root: &Path) -> Result<BTreeMap<String, i64>, GenError> {
    let path = root.join(OFFSETS_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    Ok(serde_json::from_str(&text)?)
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), GenError> {
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// SHA-256 over every file under `root` in sorted relative-path order,
/// hashing each path and its contents. Hex-encoded.
pub fn dataset_digest(root: &Path) -> Result<String, GenError> {
    let mut files = Vec::new();
    collect_files(root, &mut files)?;
    let mut rel: Vec<(String, PathBuf)> = files
        .into_iter()
        .map(|p| {
            let r = p.strip_prefix(root).unwrap_or(&p).to_string_lossy().replace('\\', "/");
            (r, p)
        })
        .collect();
    rel.sort();
    let mut h = Sha256::new();
    for (name, path) in rel {
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}
