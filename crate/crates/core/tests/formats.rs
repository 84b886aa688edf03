use std::fs;

use gaitforge_core::formats::{
    load_manifest_file, load_trial, read_insole, read_manifest, read_mocap_csv, read_pose_csv, write_insole,
    write_manifest, write_mocap_csv, write_pose_csv, FormatError, VSIN_FRAME_BYTES, VSIN_HEADER_BYTES,
};
use gaitforge_core::{
    Activity, InsoleFrame, InsoleStream, Keypoint, Manifest, MocapFrame, MocapStream, PoseFrame, PoseStream, Sex,
    StreamRef, Subject, TrialEntry, N_CHANNELS, N_KEYPOINTS,
};
use proptest::prelude::*;

fn insole(n: usize, rate: f32) -> InsoleStream {
    let frames = (0..n)
        .map(|k| {
            let mut channels = [0f32; N_CHANNELS];
            for (c, v) in channels.iter_mut().enumerate() {
                *v = ((k * 7 + c * 3) % 41) as f32 - 20.5;
            }
            InsoleFrame {
                t_us: 5_000 + 12_195 * k as u64,
                channels,
            }
        })
        .collect();
    InsoleStream::new(rate, frames).unwrap()
}

fn pose(n: usize) -> PoseStream {
    let frames = (0..n)
        .map(|k| {
            let mut keypoints = [Keypoint::default(); N_KEYPOINTS];
            for (j, kp) in keypoints.iter_mut().enumerate() {
                *kp = Keypoint {
                    x: 0.01 * j as f64 + 0.001 * k as f64,
                    y: 0.5 - 0.02 * j as f64,
                    z: -0.1,
                    v: 0.9,
                };
            }
            PoseFrame {
                t_us: 16_667 * k as u64,
                keypoints,
            }
        })
        .collect();
    PoseStream::new(frames).unwrap()
}

fn mocap(n: usize) -> MocapStream {
    let frames = (0..n)
        .map(|k| MocapFrame {
            t_us: 5_000 * k as u64,
            kam: 0.25 * k as f64,
            knee_angle: 10.0 + k as f64,
            grf_z: 700.0 - k as f64,
        })
        .collect();
    MocapStream::new(frames).unwrap()
}

#[test]
fn vsin_layout_offsets() {
    let bytes = write_insole(&insole(3, 82.0)).unwrap();
    assert_eq!(bytes.len(), VSIN_HEADER_BYTES + 3 * VSIN_FRAME_BYTES);
    assert_eq!(VSIN_FRAME_BYTES, 128);
    assert_eq!(&bytes[0..4], b"VSIN");
    assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
    assert_eq!((bytes[6], bytes[7]), (5, 6));
    assert_eq!(f32::from_le_bytes(bytes[8..12].try_into().unwrap()), 82.0);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
    // Second frame: timestamp then the first channel.
    let f1 = VSIN_HEADER_BYTES + VSIN_FRAME_BYTES;
    assert_eq!(u64::from_le_bytes(bytes[f1..f1 + 8].try_into().unwrap()), 5_000 + 12_195);
    assert_eq!(f32::from_le_bytes(bytes[f1 + 8..f1 + 12].try_into().unwrap()), 7.0 - 20.5);
}

#[test]
fn vsin_header_errors() {
    let good = write_insole(&insole(2, 82.0)).unwrap();

    let mut v2 = good.clone();
    v2[4] = 2;
    assert!(matches!(read_insole(&v2), Err(FormatError::UnsupportedVersion(2))));

    let mut layout = good.clone();
    layout[6] = 4;
    assert!(matches!(read_insole(&layout), Err(FormatError::BadLayout { sensors: 4, channels: 6 })));

    let mut rate = good.clone();
    rate[8..12].copy_from_slice(&0f32.to_le_bytes());
    assert!(matches!(read_insole(&rate), Err(FormatError::InvalidSampleRate(_))));
    rate[8..12].copy_from_slice(&f32::NAN.to_le_bytes());
    assert!(matches!(read_insole(&rate), Err(FormatError::InvalidSampleRate(_))));

    // Claimed frame count larger than the payload.
    let mut count = good.clone();
    count[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
    assert!(matches!(read_insole(&count), Err(FormatError::Truncated { frame: 2 })));
}

#[test]
fn csv_round_trips() {
    let p = pose(12);
    assert_eq!(read_pose_csv(&write_pose_csv(&p)).unwrap(), p);
    let m = mocap(40);
    assert_eq!(read_mocap_csv(&write_mocap_csv(&m)).unwrap(), m);
}

#[test]
fn csv_errors_name_the_row() {
    let text = "t_s,kam_nm,knee_angle_deg,grf_z_n\n0.0,1,2,3\n0.005,1,oops,3\n";
    let err = read_mocap_csv(text).unwrap_err();
    assert!(matches!(err, FormatError::Number { row: 3, column: 2, .. }), "{err}");

    let text = "t_s,kam_nm,knee_angle_deg,grf_z_n\n0.0,1,2,3\n0.005,1,2\n";
    assert!(matches!(
        read_mocap_csv(text),
        Err(FormatError::ColumnCount { row: 3, expected: 4, found: 3 })
    ));

    let text = "t_s,kam,knee_angle_deg,grf_z_n\n";
    assert!(matches!(read_mocap_csv(text), Err(FormatError::BadHeader { column: 1, .. })));

    let text = "t_s,kam_nm,knee_angle_deg,grf_z_n\n0.01,1,2,3\n0.01,1,2,3\n";
    assert!(matches!(read_mocap_csv(text), Err(FormatError::Row { row: 3, .. })));

    assert!(matches!(read_mocap_csv(""), Err(FormatError::Empty)));
    assert!(read_mocap_csv("t_s,kam_nm,knee_angle_deg,grf_z_n\n0,inf,0,0\n").is_err());
}

#[test]
fn pose_visibility_out_of_range_rejected() {
    let mut text = write_pose_csv(&pose(2));
    text = text.replacen(",0.9\n", ",1.2\n", 1);
    assert!(matches!(read_pose_csv(&text), Err(FormatError::Row { row: 2, .. })));
}

fn manifest() -> Manifest {
    Manifest {
        subjects: vec![
            Subject::new("S000", Sex::F, 21.0, 1.62, 58.0).unwrap(),
            Subject::new("S001", Sex::M, 30.0, 1.80, 82.5).unwrap(),
        ],
        trials: vec![TrialEntry {
            id: "S000_walk_0".into(),
            subject_id: "S000".into(),
            activity: Activity::Walk,
            insole: Some(StreamRef {
                path: "S000/walk_0.vsin".into(),
                rate_hz: 82.0,
            }),
            pose: Some(StreamRef {
                path: "S000/walk_0_pose.csv".into(),
                rate_hz: 60.0,
            }),
            mocap: Some(StreamRef {
                path: "S000/walk_0_mocap.csv".into(),
                rate_hz: 200.0,
            }),
        }],
    }
}

#[test]
fn manifest_round_trip_and_integrity() {
    let m = manifest();
    assert_eq!(read_manifest(&write_manifest(&m)).unwrap(), m);

    let mut dup = m.clone();
    dup.subjects.push(dup.subjects[0].clone());
    assert!(matches!(
        read_manifest(&write_manifest(&dup)),
        Err(FormatError::Duplicate { kind: "subject", .. })
    ));

    let mut orphan = m.clone();
    orphan.trials[0].subject_id = "S999".into();
    assert!(matches!(
        read_manifest(&write_manifest(&orphan)),
        Err(FormatError::UnknownSubject { .. })
    ));

    let text = write_manifest(&m).replace("82.5", "500.0");
    assert!(read_manifest(&text).is_err());
}

#[test]
fn dataset_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let m = manifest();
    fs::create_dir_all(root.join("S000")).unwrap();
    fs::write(root.join("manifest.json"), write_manifest(&m)).unwrap();
    let (i, p, c) = (insole(120, 82.0), pose(90), mocap(300));
    fs::write(root.join("S000/walk_0.vsin"), write_insole(&i).unwrap()).unwrap();
    fs::write(root.join("S000/walk_0_pose.csv"), write_pose_csv(&p)).unwrap();
    fs::write(root.join("S000/walk_0_mocap.csv"), write_mocap_csv(&c)).unwrap();

    let loaded = load_manifest_file(root).unwrap();
    assert_eq!(loaded, m);
    let trial = load_trial(root, &loaded.trials[0]).unwrap();
    assert_eq!(trial.insole.as_ref(), Some(&i));
    assert_eq!(trial.pose.as_ref(), Some(&p));
    assert_eq!(trial.mocap.as_ref(), Some(&c));
    assert_eq!(trial.stream_count(), 3);

    // Corrupt insole: error carries the path.
    let mut bytes = write_insole(&i).unwrap();
    bytes.truncate(bytes.len() - 1);
    fs::write(root.join("S000/walk_0.vsin"), bytes).unwrap();
    let err = load_trial(root, &loaded.trials[0]).unwrap_err().to_string();
    assert!(err.contains("walk_0.vsin") && err.contains("truncated at frame 119"), "{err}");

    // Missing file.
    fs::remove_file(root.join("S000/walk_0_pose.csv")).unwrap();
    fs::write(root.join("S000/walk_0.vsin"), write_insole(&i).unwrap()).unwrap();
    let err = load_trial(root, &loaded.trials[0]).unwrap_err().to_string();
    assert!(err.contains("walk_0_pose.csv"), "{err}");
}

fn arb_insole() -> impl Strategy<Value = InsoleStream> {
    (
        1.0f32..2000.0,
        prop::collection::vec((1u64..100_000, prop::array::uniform30(-1e4f32..1e4)), 0..20),
        0u64..1_000_000_000,
    )
        .prop_map(|(rate, steps, t0)| {
            let mut t = t0;
            let frames = steps
                .into_iter()
                .map(|(dt, channels)| {
                    t += dt;
                    InsoleFrame { t_us: t, channels }
                })
                .collect();
            InsoleStream::new(rate, frames).unwrap()
        })
}

proptest! {
    #[test]
    fn vsin_round_trip(s in arb_insole()) {
        let bytes = write_insole(&s).unwrap();
        prop_assert_eq!(bytes.len(), VSIN_HEADER_BYTES + s.len() * VSIN_FRAME_BYTES);
        let back = read_insole(&bytes).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(write_insole(&back).unwrap(), bytes);
    }

    #[test]
    fn vsin_reader_total(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let _ = read_insole(&bytes);
    }

    #[test]
    fn vsin_truncation_always_reported(s in arb_insole(), cut in 1usize..200) {
        prop_assume!(!s.is_empty());
        let bytes = write_insole(&s).unwrap();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(read_insole(&bytes[..keep]).is_err());
    }

    #[test]
    fn mocap_csv_round_trip(
        rows in prop::collection::vec((1u64..50_000, -200.0f64..200.0, -10.0f64..140.0, 0.0f64..3000.0), 0..30)
    ) {
        let mut t = 0;
        let frames: Vec<MocapFrame> = rows
            .into_iter()
            .map(|(dt, kam, knee_angle, grf_z)| {
                t += dt;
                MocapFrame { t_us: t, kam, knee_angle, grf_z }
            })
            .collect();
        let m = MocapStream::new(frames).unwrap();
        prop_assert_eq!(read_mocap_csv(&write_mocap_csv(&m)).unwrap(), m);
    }
}
