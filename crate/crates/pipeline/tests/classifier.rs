mod common;

use gaitforge_core::{Activity, SplitMember, SplitRatios};
use gaitforge_pipeline::{
    average_probs, build_class_windows, ensemble_predict, pair_windows, train_classifier, ClassWindow, ClassifierConfig,
    ClassifierEnsemble, Dataset, Modality, TrainedClassifier,
};
use proptest::prelude::*;
use std::sync::OnceLock;

struct Fixture {
    _dir: tempfile::TempDir,
    ds: Dataset,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let ds = common::small_dataset(dir.path(), 5, 6);
        Fixture { _dir: dir, ds }
    })
}

fn windows(modality: Modality, member: SplitMember) -> Vec<ClassWindow> {
    let ds = &fixture().ds;
    let split = ds.split(SplitRatios::default(), 0).unwrap();
    build_class_windows(&ds.trials_in(&split, member), modality).windows
}

fn quick(modality: Modality, lr: f64, epochs: usize, seed: u64) -> ClassifierConfig {
    let mut c = ClassifierConfig::for_modality(modality);
    c.hidden = 6;
    c.train.learning_rate = lr;
    c.train.max_epochs = epochs;
    c.train.seed = seed;
    c.samples_per_epoch = Some(128);
    c
}

fn train(modality: Modality, cfg: &ClassifierConfig) -> TrainedClassifier {
    let tr = windows(modality, SplitMember::Train);
    let va = windows(modality, SplitMember::Val);
    train_classifier(&tr, &va, modality, cfg).unwrap()
}

#[test]
fn same_seed_gives_identical_training() {
    let cfg = quick(Modality::Insole, 0.01, 3, 4);
    let a = train(Modality::Insole, &cfg);
    let b = train(Modality::Insole, &cfg);
    assert_eq!(a.report.final_train_loss(), b.report.final_train_loss());
    assert_eq!(a, b);
    let c = train(Modality::Insole, &quick(Modality::Insole, 0.01, 3, 5));
    assert_ne!(a.net, c.net);
}

#[test]
fn zero_learning_rate_leaves_parameters_unchanged() {
    let one = train(Modality::Pose, &quick(Modality::Pose, 0.0, 1, 9));
    let many = train(Modality::Pose, &quick(Modality::Pose, 0.0, 4, 9));
    assert_eq!(one.net, many.net);
}

#[test]
fn missing_class_in_training_set_is_an_error() {
    let tr: Vec<ClassWindow> = windows(Modality::Pose, SplitMember::Train)
        .into_iter()
        .filter(|w| w.label != Activity::Run)
        .collect();
    let err = train_classifier(&tr, &[], Modality::Pose, &quick(Modality::Pose, 0.01, 1, 0)).unwrap_err();
    assert!(err.is_data_error());
}

#[test]
fn wrong_modality_windows_are_rejected() {
    let tr = windows(Modality::Insole, SplitMember::Train);
    assert!(train_classifier(&tr, &[], Modality::Pose, &quick(Modality::Pose, 0.01, 1, 0)).is_err());
}

#[test]
fn checkpoint_round_trip_preserves_predictions() {
    let model = train(Modality::Pose, &quick(Modality::Pose, 0.01, 2, 1));
    let dir = tempfile::tempdir().unwrap();
    model.save(dir.path()).unwrap();
    let back = TrainedClassifier::load(dir.path(), Modality::Pose).unwrap();
    assert_eq!(back, model);
    let te = windows(Modality::Pose, SplitMember::Test);
    let refs: Vec<&ClassWindow> = te.iter().collect();
    assert_eq!(back.predict_proba(&refs).unwrap(), model.predict_proba(&refs).unwrap());
}

#[test]
fn ensemble_uses_available_streams() {
    let ens = ClassifierEnsemble {
        pose: Some(train(Modality::Pose, &quick(Modality::Pose, 0.01, 2, 2))),
        insole: Some(train(Modality::Insole, &quick(Modality::Insole, 0.01, 2, 2))),
    };
    let pose = windows(Modality::Pose, SplitMember::Test);
    let insole = windows(Modality::Insole, SplitMember::Test);
    let pairs = pair_windows(&pose, &insole);
    let (p, i) = pairs.iter().find_map(|&(p, i)| Some((p?, i?))).expect("a paired window");
    let (pw, iw) = (&pose[p], &insole[i]);
    assert!((pw.center_us - iw.center_us).abs() <= 100_000);

    let pp = ens.pose.as_ref().unwrap().predict_proba(&[pw]).unwrap()[0];
    let ip = ens.insole.as_ref().unwrap().predict_proba(&[iw]).unwrap()[0];
    let (probs, _) = ensemble_predict(&ens, Some(pw), Some(iw)).unwrap();
    for c in 0..5 {
        assert!((probs[c] - (pp[c] + ip[c]) / 2.0).abs() < 1e-15);
    }
    assert_eq!(ensemble_predict(&ens, Some(pw), None).unwrap().0, pp);
    assert_eq!(ensemble_predict(&ens, None, Some(iw)).unwrap().0, ip);
    assert!(ensemble_predict(&ens, None, None).is_err());

    let mut far = iw.clone();
    far.center_us = pw.center_us + 150_000;
    assert!(ensemble_predict(&ens, Some(pw), Some(&far)).is_err());

    let pose_only = ClassifierEnsemble { pose: ens.pose.clone(), insole: None };
    assert_eq!(ensemble_predict(&pose_only, Some(pw), Some(iw)).unwrap().0, pp);
}

#[test]
fn pairing_picks_the_nearest_window_of_the_same_trial() {
    let ds = &fixture().ds;
    let t: Vec<_> = ds.trials.iter().take(2).collect();
    let pose = build_class_windows(&t[..1], Modality::Pose).windows;
    let insole = build_class_windows(&t, Modality::Insole).windows;
    let pairs = pair_windows(&pose, &insole);
    for &(p, i) in &pairs {
        match (p, i) {
            (Some(p), Some(i)) => {
                assert_eq!(pose[p].trial_id, insole[i].trial_id);
                let dt = (pose[p].center_us - insole[i].center_us).abs();
                let best = insole
                    .iter()
                    .filter(|w| w.trial_id == pose[p].trial_id)
                    .map(|w| (w.center_us - pose[p].center_us).abs())
                    .min()
                    .unwrap();
                assert_eq!(dt, best);
            }
            (None, Some(i)) => assert_eq!(insole[i].trial_id, t[1].trial.id),
            (Some(_), None) | (None, None) => {}
        }
    }
    let insole_alone = pairs.iter().filter(|p| p.0.is_none()).count();
    assert_eq!(insole_alone, insole.iter().filter(|w| w.trial_id == t[1].trial.id).count());
}

#[test]
fn averaging_example() {
    let avg = average_probs(&[[0.6, 0.4, 0.0, 0.0, 0.0], [0.2, 0.8, 0.0, 0.0, 0.0]]);
    let want = [0.4, 0.6, 0.0, 0.0, 0.0];
    for c in 0..5 {
        assert!((avg[c] - want[c]).abs() < 1e-15);
    }
    let same = [0.1, 0.2, 0.3, 0.25, 0.15];
    assert_eq!(average_probs(&[same, same]), same);
}

fn argmax(p: &[f64; 5]) -> usize {
    (0..5).fold(0, |b, i| if p[i] > p[b] { i } else { b })
}

fn distribution(raw: [f64; 5]) -> [f64; 5] {
    let s: f64 = raw.iter().sum();
    raw.map(|v| v / s)
}

proptest! {
    #[test]
    fn agreeing_models_keep_their_argmax(
        mut a in prop::array::uniform5(0.01f64..1.0),
        mut b in prop::array::uniform5(0.01f64..1.0),
        k in 0usize..5,
    ) {
        // Make class k the strict maximum of both.
        a[k] = a.iter().cloned().fold(0.0, f64::max) + 0.01;
        b[k] = b.iter().cloned().fold(0.0, f64::max) + 0.01;
        let (a, b) = (distribution(a), distribution(b));
        prop_assert_eq!(argmax(&a), k);
        prop_assert_eq!(argmax(&b), k);
        let avg = average_probs(&[a, b]);
        prop_assert_eq!(argmax(&avg), argmax(&a));
        prop_assert!((avg.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
