use std::path::Path;
use std::process::{Command, Output};

use gaitforge_core::Activity;
use gaitforge_pipeline::load_dataset;
use gaitforge_pipeline::tasks::{run_kam_task, write_kam_outcome, KamTask};
use serde_json::{json, Value};

fn gaitforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaitforge"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, value: &Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn small_generator() -> Value {
    json!({
        "generator": {
            "trials": {"walk": 1, "run": 1, "sit_to_stand": 1, "stand_to_sit": 1, "null": 1},
            "walk_duration_s": 4.0,
            "run_duration_s": 3.0,
            "null_duration_s": 3.0
        }
    })
}

fn small_kam() -> Value {
    json!({"kam": {"model": {"hidden": 6, "dense": 4, "train": {"max_epochs": 4}}}})
}

fn generate(dir: &Path, subjects: &str) -> std::path::PathBuf {
    let data = dir.join("data");
    let cfg = write_config(dir, &small_generator());
    let out = gaitforge(&["generate", "--subjects", subjects, "--seed", "7", "--out", p(&data), "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    data
}

#[test]
fn generate_then_inspect_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "6");
    assert!(data.join("manifest.json").exists());
    let record: Value = serde_json::from_slice(&std::fs::read(data.join("run-generate.json")).unwrap()).unwrap();
    assert_eq!(record["seed"], 7);
    assert_eq!(record["config"]["n_subjects"], 6);
    assert_eq!(record["config"]["walk_duration_s"], 4.0);

    let report_dir = dir.path().join("inspect");
    let out = gaitforge(&["inspect", "--data", p(&data), "--out", p(&report_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value = serde_json::from_slice(&std::fs::read(report_dir.join("inspect.json")).unwrap()).unwrap();
    assert_eq!(report["trials"], 30);
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);
    assert_eq!(report["load_errors"].as_array().unwrap().len(), 0);

    let out = gaitforge(&["sync", "--data", p(&data), "--out", p(&report_dir)]);
    assert!(out.status.success());
    let sync: Value = serde_json::from_slice(&std::fs::read(report_dir.join("sync.json")).unwrap()).unwrap();
    assert_eq!(sync["offsets_us"].as_object().unwrap().len(), 30);
    assert_eq!(sync["reference"]["compared"], 30);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(gaitforge(&["generate", "--bogus"]).status.code(), Some(1));
    assert_eq!(gaitforge(&["launch"]).status.code(), Some(1));
    assert_eq!(gaitforge(&[]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let d = p(dir.path());
    // Seed is required for generation and training.
    assert_eq!(gaitforge(&["generate", "--out", d]).status.code(), Some(1));
    assert_eq!(gaitforge(&["train-kam", "--activity", "walk", "--data", d, "--out", d]).status.code(), Some(1));
    let bad = gaitforge(&["train-kam", "--activity", "hop", "--data", d, "--out", d, "--seed", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("hop"));
    let cfg = write_config(dir.path(), &json!({"colour": "blue"}));
    assert_eq!(gaitforge(&["inspect", "--config", &cfg]).status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_gaitforge"))
        .args(["inspect", "--data", d])
        .env("GAITFORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(gaitforge(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_or_corrupt_data_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing");
    assert_eq!(gaitforge(&["inspect", "--data", p(&missing)]).status.code(), Some(2));

    let data = generate(dir.path(), "4");
    let models = dir.path().join("m");
    let cfg = write_config(dir.path(), &small_kam());
    let out = gaitforge(&[
        "train-kam", "--activity", "walk", "--data", p(&data), "--seed", "1", "--out", p(&models), "--config", &cfg,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let victim = std::fs::read_dir(data.join("insole")).unwrap().next().unwrap().unwrap().path();
    std::fs::write(&victim, b"VSIN garbage").unwrap();
    let out = gaitforge(&["evaluate", "--model", p(&models), "--data", p(&data)]);
    assert_eq!(out.status.code(), Some(2));
    let name = victim.file_name().unwrap().to_str().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains(name));
    assert_eq!(gaitforge(&["inspect", "--data", p(&data)]).status.code(), Some(2));
}

#[test]
fn cli_training_matches_library_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "6");
    let cli_out = dir.path().join("cli");
    let cfg = write_config(dir.path(), &json!({"seed": 99, "kam": {"model": {"hidden": 6, "dense": 4, "train": {"max_epochs": 4}}}}));
    let out = gaitforge(&[
        "train-kam", "--activity", "run", "--knee-angle", "--data", p(&data), "--seed", "3", "--out", p(&cli_out),
        "--config", &cfg,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // Flags override the file: seed 3, not 99.
    let record: Value = serde_json::from_slice(&std::fs::read(cli_out.join("run-train-kam-run.json")).unwrap()).unwrap();
    assert_eq!(record["seed"], 3);
    assert_eq!(record["config"]["with_knee_angle"], true);

    let mut model = gaitforge_pipeline::KamConfig::for_activity(Activity::Run);
    model.hidden = 6;
    model.dense = 4;
    model.train.max_epochs = 4;
    let task = KamTask {
        activity: Activity::Run,
        with_knee_angle: true,
        model: Some(model),
        seed: 3,
        ..KamTask::default()
    };
    let ds = load_dataset(&data).unwrap();
    let lib_out = dir.path().join("lib");
    write_kam_outcome(&lib_out, &task, &run_kam_task(&ds, &task).unwrap()).unwrap();
    for f in ["kam_run_metrics.json", "kam_run_strides.csv", "kam_run_waveform.csv", "kam_run.gfnn", "kam_run.json", "split.json"] {
        assert_eq!(std::fs::read(cli_out.join(f)).unwrap(), std::fs::read(lib_out.join(f)).unwrap(), "{f}");
    }

    let out = gaitforge(&["evaluate", "--model", p(&cli_out), "--data", p(&data)]);
    assert!(out.status.success());
    let eval: Value = serde_json::from_slice(&std::fs::read(cli_out.join("eval_metrics.json")).unwrap()).unwrap();
    let metrics: Value = serde_json::from_slice(&std::fs::read(cli_out.join("kam_run_metrics.json")).unwrap()).unwrap();
    assert_eq!(eval["kam"][0], metrics["test"]);

    let inferred = dir.path().join("inferred");
    let out = gaitforge(&["infer", "--model", p(&cli_out), "--data", p(&data), "--out", p(&inferred)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(inferred.join("stride_predictions.csv").exists());
}

#[test]
fn classifier_training_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "6");
    let cfg = write_config(
        dir.path(),
        &json!({"classifier": {"pose": {"hidden": 4, "train": {"max_epochs": 2}}, "insole": {"hidden": 4, "train": {"max_epochs": 2}}}}),
    );
    let mut metrics = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = gaitforge(&[
            "train-classifier", "--data", p(&data), "--seed", "5", "--out", p(&out_dir), "--modality", "ensemble",
            "--config", &cfg,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        metrics.push(std::fs::read(out_dir.join("metrics.json")).unwrap());
        assert!(out_dir.join("pose_classifier.gfnn").exists() && out_dir.join("insole_classifier.gfnn").exists());
    }
    assert_eq!(metrics[0], metrics[1]);
}
