use gaitforge_core::formats::{load_manifest_file, load_trial, write_insole, write_mocap_csv, write_pose_csv};
use gaitforge_core::{channel_index, validate_trial, Activity, Axis, KeypointId, Sensor, N_CHANNELS};
use gaitforge_dsp::{knee_angle, sync_streams};
use gaitforge_syngen::*;

fn quiet() -> GenParams {
    GenParams {
        noise: NoiseParams::none(),
        ..GenParams::default()
    }
}

fn trial(activity: Activity, seed: u64, params: &GenParams) -> GeneratedTrial {
    let subject = gen_subject(params.seed, (seed % 7) as usize);
    gen_trial("T", &subject, activity, params.duration_s(activity), seed, params).unwrap()
}

#[test]
fn same_seed_same_bytes() {
    let p = GenParams::default();
    for act in Activity::ALL {
        let a = trial(act, 11, &p).trial;
        let b = trial(act, 11, &p).trial;
        assert_eq!(write_insole(a.insole.as_ref().unwrap()).unwrap(), write_insole(b.insole.as_ref().unwrap()).unwrap());
        assert_eq!(write_pose_csv(a.pose.as_ref().unwrap()), write_pose_csv(b.pose.as_ref().unwrap()));
        assert_eq!(write_mocap_csv(a.mocap.as_ref().unwrap()), write_mocap_csv(b.mocap.as_ref().unwrap()));
        let c = trial(act, 12, &p).trial;
        assert_ne!(write_mocap_csv(a.mocap.as_ref().unwrap()), write_mocap_csv(c.mocap.as_ref().unwrap()));
    }
}

#[test]
fn stream_rates_and_offset_bound() {
    let p = GenParams::default();
    for seed in 0..50 {
        let g = trial(Activity::Walk, seed, &p);
        assert!(g.offset_us.abs() <= MAX_OFFSET_US);
        let t = &g.trial;
        let dur = p.walk_duration_s;
        assert_eq!(t.insole.as_ref().unwrap().len(), (dur * 82.0).round() as usize);
        assert_eq!(t.pose.as_ref().unwrap().len(), (dur * 60.0).round() as usize);
        assert_eq!(t.mocap.as_ref().unwrap().len(), (dur * 200.0).round() as usize);
        assert_eq!(t.insole.as_ref().unwrap().frames()[1].t_us, 12_195);
        assert_eq!(t.mocap.as_ref().unwrap().frames()[1].t_us, 5_000);
    }
}

#[test]
fn mocap_kam_is_the_oracle_of_the_model() {
    let p = quiet();
    for act in Activity::ALL {
        let g = trial(act, 3, &p);
        for f in g.trial.mocap.as_ref().unwrap().frames() {
            let t = f.t_us as f64 / 1e6;
            let k = kam_oracle(&g.model.channels(t), g.model.knee_angle(t));
            assert!((f.kam - k).abs() < 1e-12);
            assert_eq!(f.grf_z, g.model.total_vertical_force(t));
        }
    }
}

#[test]
fn noise_free_insole_is_the_shifted_model() {
    let p = quiet();
    for act in Activity::ALL {
        let g = trial(act, 8, &p);
        for f in g.trial.insole.as_ref().unwrap().frames() {
            let clean = g.model.channels((f.t_us as i64 - g.offset_us) as f64 / 1e6);
            for (got, want) in f.channels.iter().zip(&clean) {
                assert_eq!(*got, *want as f32);
            }
        }
    }
}

#[test]
fn oracle_recomputed_from_noise_free_insole() {
    // With the true offset undone, the oracle applied to recorded insole
    // channels reproduces mocap KAM to single precision.
    let p = quiet();
    let g = trial(Activity::Walk, 4, &p);
    let insole = g.trial.insole.as_ref().unwrap();
    for f in insole.frames().iter().step_by(7) {
        let t = (f.t_us as i64 - g.offset_us) as f64 / 1e6;
        let ch: [f64; N_CHANNELS] = std::array::from_fn(|c| f.channels[c] as f64);
        let kam = kam_oracle(&ch, g.model.knee_angle(t));
        assert!((kam - g.model.kam(t)).abs() < 1e-4 * (1.0 + g.model.kam(t).abs()));
    }
}

#[test]
fn null_trial_is_quiet_standing() {
    let p = GenParams::default();
    for seed in 0..10 {
        let g = trial(Activity::Null, seed, &p);
        let bw = g.model.body_weight;
        let insole = g.trial.insole.as_ref().unwrap();
        let total = insole.total_vertical_force();
        let mean = total.iter().sum::<f64>() / total.len() as f64;
        assert!((mean / bw - 0.5).abs() < 0.05, "{}", mean / bw);
        for f in g.trial.mocap.as_ref().unwrap().frames() {
            assert!((f.knee_angle - 5.0).abs() < 3.0);
        }
    }
}

#[test]
fn running_has_exact_zero_force_flight() {
    let p = quiet();
    for seed in 0..10 {
        let g = trial(Activity::Run, seed, &p);
        let total = g.trial.insole.as_ref().unwrap().total_vertical_force();
        let zeros = total.iter().filter(|&&f| f == 0.0).count();
        assert!(zeros as f64 > 0.4 * total.len() as f64, "{zeros}");
        let grf = g.trial.mocap.as_ref().unwrap().grf_z();
        assert!(grf.contains(&0.0));
    }
}

#[test]
fn pose_knee_angle_matches_model() {
    let p = quiet();
    for act in Activity::ALL {
        let g = trial(act, 21, &p);
        for f in g.trial.pose.as_ref().unwrap().frames() {
            let xy = |id| {
                let k = f.get(id);
                [k.x, k.y]
            };
            let a = knee_angle(&xy(KeypointId::RightHip), &xy(KeypointId::RightKnee), &xy(KeypointId::RightAnkle)).unwrap();
            let want = g.model.knee_angle(f.t_us as f64 / 1e6).abs();
            assert!((a - want).abs() < 1e-6, "{act}: {a} vs {want}");
        }
    }
}

#[test]
fn pose_coordinates_stay_in_frame() {
    let p = GenParams::default();
    for act in Activity::ALL {
        for seed in 0..5 {
            let g = trial(act, seed, &p);
            for f in g.trial.pose.as_ref().unwrap().frames() {
                for k in &f.keypoints {
                    assert!((0.0..=1.0).contains(&k.x) && (0.0..=1.0).contains(&k.y), "{act} {k:?}");
                    assert!((0.0..=1.0).contains(&k.v));
                }
            }
        }
    }
}

#[test]
fn sit_stand_ramps_between_seated_and_standing() {
    let p = quiet();
    for (act, rising) in [(Activity::SitToStand, true), (Activity::StandToSit, false)] {
        let g = trial(act, 5, &p);
        let knee = g.trial.mocap.as_ref().unwrap().knee_angle();
        let (first, last) = (knee[0], *knee.last().unwrap());
        let (seated, standing) = if rising { (first, last) } else { (last, first) };
        assert!(seated > 75.0 && seated < 101.0, "{seated}");
        assert!((standing - 5.0).abs() < 3.0, "{standing}");
        let diffs = knee.windows(2).map(|w| w[1] - w[0]);
        if rising {
            assert!(diffs.clone().all(|d| d <= 1e-12));
        } else {
            assert!(diffs.clone().all(|d| d >= -1e-12));
        }
    }
}

#[test]
fn shear_saturation_is_soft() {
    let p = GenParams {
        saturate: true,
        ..quiet()
    };
    let g = trial(Activity::Run, 2, &p);
    let mut beyond = 0;
    for f in g.trial.insole.as_ref().unwrap().frames() {
        for s in Sensor::ALL {
            for a in [Axis::Fx, Axis::Fy] {
                let v = f.channels[channel_index(s, a)].abs();
                assert!(v < 40.0);
                beyond += (v > 20.0) as usize;
            }
        }
    }
    assert!(beyond > 0);
}

#[test]
fn injected_offsets_recovered_by_sync() {
    let p = GenParams::default();
    let mut misses = Vec::new();
    for seed in 0..100u64 {
        let act = Activity::ALL[seed as usize % 5];
        let g = trial(act, 1000 + seed, &p);
        let t = &g.trial;
        let est = sync_streams(t.insole.as_ref().unwrap(), t.mocap.as_ref().unwrap()).unwrap();
        if (est - g.offset_us).abs() > 5_000 {
            misses.push((act, g.offset_us, est));
        }
    }
    assert!(misses.len() <= 1, "{misses:?}");
}

#[test]
fn dataset_round_trip_and_digest() {
    let params = GenParams {
        n_subjects: 2,
        seed: 9,
        ..GenParams::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ds = gen_dataset(&params, a.path()).unwrap();
    gen_dataset(&params, b.path()).unwrap();
    assert_eq!(dataset_digest(a.path()).unwrap(), dataset_digest(b.path()).unwrap());
    assert_eq!(ds.manifest.trials.len(), 2 * params.trials.per_subject());
    assert_eq!(read_offsets(a.path()).unwrap(), ds.offsets);

    let manifest = load_manifest_file(a.path()).unwrap();
    assert_eq!(manifest, ds.manifest);
    for entry in &manifest.trials {
        let t = load_trial(a.path(), entry).unwrap();
        assert!(validate_trial(&t, &manifest).is_empty());
        let subject = manifest.subject(&entry.subject_id).unwrap();
        let g = gen_trial(
            &entry.id,
            subject,
            entry.activity,
            params.duration_s(entry.activity),
            trial_seed(params.seed, &entry.id),
            &params,
        )
        .unwrap();
        assert_eq!(t.insole, g.trial.insole);
        assert_eq!(t.mocap.as_ref().unwrap().len(), g.trial.mocap.as_ref().unwrap().len());
    }
    assert_eq!(manifest.trials[0].id, "S000_walk_01");

    let other = tempfile::tempdir().unwrap();
    gen_dataset(&GenParams { seed: 10, ..params.clone() }, other.path()).unwrap();
    assert_ne!(dataset_digest(a.path()).unwrap(), dataset_digest(other.path()).unwrap());
}

#[test]
fn trial_seed_depends_on_both_inputs() {
    assert_eq!(trial_seed(1, "S000_walk_01"), trial_seed(1, "S000_walk_01"));
    assert_ne!(trial_seed(1, "S000_walk_01"), trial_seed(2, "S000_walk_01"));
    assert_ne!(trial_seed(1, "S000_walk_01"), trial_seed(1, "S000_walk_02"));
}

#[test]
fn invalid_params_rejected() {
    let mut p = GenParams::default();
    p.noise.insole_rel = -0.1;
    assert!(p.validate().is_err());
    let p = GenParams {
        sit_stand_duration_s: 1.0,
        ..GenParams::default()
    };
    assert!(p.validate().is_err());
    let dir = tempfile::tempdir().unwrap();
    assert!(gen_dataset(&GenParams { n_subjects: 0, ..GenParams::default() }, dir.path()).is_err());
}
