//! Pose and mocap streams as plain CSV with a fixed header.
//!
//! Pose: `t_s,kp0_x,kp0_y,kp0_z,kp0_v,...,kp13_v` (57 columns).
//! Mocap: `t_s,kam_nm,knee_angle_deg,grf_z_n` (4 columns).
//! Row numbers in errors are 1-based file lines; the header is row 1.

use std::fmt::Write as _;

use super::FormatError;
use crate::{Keypoint, MocapFrame, MocapStream, PoseFrame, PoseStream, N_KEYPOINTS};

pub const POSE_COLUMNS: usize = 1 + 4 * N_KEYPOINTS;
pub const MOCAP_COLUMNS: usize = 4;
const MOCAP_HEADER: [&str; MOCAP_COLUMNS] = ["t_s", "kam_nm", "knee_angle_deg", "grf_z_n"];

fn pose_header() -> Vec<String> {
    let mut cols = vec!["t_s".to_string()];
    for k in 0..N_KEYPOINTS {
        for axis in ["x", "y", "z", "v"] {
            cols.push(format!("kp{k}_{axis}"));
        }
    }
    cols
}

/// Parse every row into numbers after checking the header and column count.
fn parse_rows(text: &str, header: &[String]) -> Result<Vec<(usize, Vec<f64>)>, FormatError> {
    let expected = header.len();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FormatError::Csv(e.to_string()))?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if record.len() != expected {
            return Err(FormatError::ColumnCount {
                row,
                expected,
                found: record.len(),
            });
        }
        if !saw_header {
            saw_header = true;
            for (column, (found, want)) in record.iter().zip(header).enumerate() {
                if found != want {
                    return Err(FormatError::BadHeader {
                        row,
                        column,
                        expected: want.clone(),
                        found: found.to_string(),
                    });
                }
            }
            continue;
        }
        let mut values = Vec::with_capacity(expected);
        for (column, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| FormatError::Number {
                row,
                column,
                text: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(FormatError::Number {
                    row,
                    column,
                    text: field.to_string(),
                });
            }
            values.push(v);
        }
        rows.push((row, values));
    }
    if !saw_header {
        return Err(FormatError::Empty);
    }
    Ok(rows)
}

fn seconds_to_us(row: usize, t_s: f64) -> Result<u64, FormatError> {
    if t_s < 0.0 {
        return Err(FormatError::Row {
            row,
            reason: format!("negative timestamp {t_s}"),
        });
    }
    Ok((t_s * 1e6).round() as u64)
}

fn check_order(rows: &[(usize, u64)]) -> Result<(), FormatError> {
    for pair in rows.windows(2) {
        if pair[1].1 <= pair[0].1 {
            return Err(FormatError::Row {
                row: pair[1].0,
                reason: "timestamp order violation".into(),
            });
        }
    }
    Ok(())
}

pub fn read_pose_csv(text: &str) -> Result<PoseStream, FormatError> {
    let rows = parse_rows(text, &pose_header())?;
    let mut frames = Vec::with_capacity(rows.len());
    let mut times = Vec::with_capacity(rows.len());
    for (row, v) in rows {
        let t_us = seconds_to_us(row, v[0])?;
        let mut keypoints = [Keypoint::default(); N_KEYPOINTS];
        for (k, kp) in keypoints.iter_mut().enumerate() {
            let b = 1 + 4 * k;
            *kp = Keypoint {
                x: v[b],
                y: v[b + 1],
                z: v[b + 2],
                v: v[b + 3],
            };
            if !(0.0..=1.0).contains(&kp.v) {
                return Err(FormatError::Row {
                    row,
                    reason: format!("visibility {} of keypoint {k} outside [0, 1]", kp.v),
                });
            }
        }
        times.push((row, t_us));
        frames.push(PoseFrame { t_us, keypoints });
    }
    check_order(&times)?;
    Ok(PoseStream::new(frames)?)
}

pub fn write_pose_csv(stream: &PoseStream) -> String {
    let mut out = pose_header().join(",");
    out.push('\n');
    for f in stream.frames() {
        write!(out, "{}", f.t_us as f64 / 1e6).unwrap();
        for kp in &f.keypoints {
            write!(out, ",{},{},{},{}", kp.x, kp.y, kp.z, kp.v).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_mocap_csv(text: &str) -> Result<MocapStream, FormatError> {
    let header: Vec<String> = MOCAP_HEADER.iter().map(|s| s.to_string()).collect();
    let rows = parse_rows(text, &header)?;
    let mut frames = Vec::with_capacity(rows.len());
    let mut times = Vec::with_capacity(rows.len());
    for (row, v) in rows {
        let t_us = seconds_to_us(row, v[0])?;
        times.push((row, t_us));
        frames.push(MocapFrame {
            t_us,
            kam: v[1],
            knee_angle: v[2],
            grf_z: v[3],
        });
    }
    check_order(&times)?;
    Ok(MocapStream::new(frames)?)
}

pub fn write_mocap_csv(stream: &MocapStream) -> String {
    let mut out = MOCAP_HEADER.join(",");
    out.push('\n');
    for f in stream.frames() {
        writeln!(
            out,
            "{},{},{},{}",
            f.t_us as f64 / 1e6,
            f.kam,
            f.knee_angle,
            f.grf_z
        )
        .unwrap();
    }
    out
}
