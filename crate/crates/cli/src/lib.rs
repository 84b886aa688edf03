//! The `gaitforge` command-line tool.
//!
//! Settings come from three layers: built-in defaults, an optional JSON file
//! given with `--config`, and command-line flags. Each layer overrides the
//! one before it. Exit codes: 0 on success, 1 for usage and configuration
//! errors, 2 for data errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use gaitforge_core::formats::{load_manifest_file, load_trial};
use gaitforge_core::{validate_trial, Activity};
use gaitforge_pipeline::io::{create_dir, read_json, write_json};
use gaitforge_pipeline::tasks::{
    evaluate_saved, infer_saved, run_classifier_task, run_kam_task, write_classifier_outcome, write_eval_report,
    write_infer_outcome, write_kam_outcome, ClassifierTask, KamTask,
};
use gaitforge_pipeline::{load_dataset, KamConfig, Modality, PipelineError};
use gaitforge_syngen::{gen_dataset, read_offsets, GenError, GenParams, OFFSETS_FILE};

pub const THREADS_ENV: &str = "GAITFORGE_THREADS";
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_data_error() {
            CliError::Data(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Params(m) => CliError::Usage(format!("invalid generator parameters: {m}")),
            other => CliError::Data(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "gaitforge", version, about = "Insole and video gait analysis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset
    Generate(GenerateArgs),
    /// Estimate the insole clock offset of every trial
    Sync(DataArgs),
    /// Train the activity classifiers
    TrainClassifier(TrainClassifierArgs),
    /// Train a knee adduction moment regressor for one activity
    TrainKam(TrainKamArgs),
    /// Score saved models on the test subjects of their split
    Evaluate(ModelArgs),
    /// Run saved models over every trial of a dataset
    Infer(ModelArgs),
    /// Validate a dataset and summarize its contents
    Inspect(DataArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Output dataset directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of subjects
    #[arg(long)]
    subjects: Option<usize>,
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Dataset root
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainClassifierArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    /// Model output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// pose (or video), insole, or ensemble to train both
    #[arg(long)]
    modality: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainKamArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// walk, run, sts or stst
    #[arg(long)]
    activity: Option<String>,
    /// Add the pose knee angle as a 16th input channel
    #[arg(long)]
    knee_angle: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Directory holding trained models and their split.json
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory (defaults to the model directory for evaluate)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Contents of a `--config` file. Every flag has a key of the same name;
/// the sections hold task settings and may be partial.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub seed: Option<u64>,
    pub subjects: Option<usize>,
    pub activity: Option<String>,
    pub knee_angle: Option<bool>,
    pub modality: Option<String>,
    pub generator: Option<Value>,
    pub classifier: Option<Value>,
    pub kam: Option<Value>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

/// Recursively overlays `patch` onto `base`; objects merge key by key and
/// anything else replaces.
fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

fn layered<T: Serialize + DeserializeOwned>(default: &T, patch: Option<&Value>, section: &str) -> CliResult<T> {
    let mut v = serde_json::to_value(default).expect("settings serialize");
    if let Some(p) = patch {
        merge(&mut v, p);
    }
    serde_json::from_value(v).map_err(|e| usage(format!("config section \"{section}\": {e}")))
}

fn required<T>(cli: Option<T>, file: Option<T>, flag: &str) -> CliResult<T> {
    cli.or(file).ok_or_else(|| usage(format!("--{flag} is required")))
}

/// Reproducibility record written next to every command's outputs.
#[derive(Debug, Serialize)]
struct RunRecord<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: Option<u64>,
    data: Option<&'a Path>,
    model: Option<&'a Path>,
    out: &'a Path,
    config: T,
}

fn write_record<T: Serialize>(
    command: &str,
    seed: Option<u64>,
    data: Option<&Path>,
    model: Option<&Path>,
    out: &Path,
    config: T,
) -> CliResult<()> {
    let record = RunRecord {
        tool: "gaitforge",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        data,
        model,
        out,
        config,
    };
    create_dir(out)?;
    write_json(&out.join(format!("run-{command}.json")), &record)?;
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got \"{raw}\"")))?;
    // A pool may already exist when several commands run in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses arguments (including the program name) and runs one command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match configure_threads().and_then(|_| dispatch(cli.command)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Sync(a) => sync(a),
        Command::TrainClassifier(a) => train_classifier(a),
        Command::TrainKam(a) => train_kam(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Infer(a) => infer(a),
        Command::Inspect(a) => inspect(a),
    }
}

fn generate(a: GenerateArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let out = required(a.out, file.out.clone(), "out")?;
    let mut params: GenParams = layered(&GenParams::default(), file.generator.as_ref(), "generator")?;
    params.seed = required(a.seed, file.seed, "seed")?;
    if let Some(n) = a.subjects.or(file.subjects) {
        params.n_subjects = n;
    }
    params.validate()?;
    let ds = gen_dataset(&params, &out)?;
    write_record("generate", Some(params.seed), None, None, &out, &params)?;
    println!(
        "generated {} subjects, {} trials in {}",
        ds.manifest.subjects.len(),
        ds.manifest.trials.len(),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct SyncReport {
    trials: usize,
    offsets_us: BTreeMap<String, i64>,
    /// Comparison with recorded offsets, when the dataset ships them.
    reference: Option<SyncComparison>,
}

#[derive(Debug, Serialize)]
struct SyncComparison {
    compared: usize,
    within_5ms: usize,
    max_abs_error_us: i64,
}

fn sync(a: DataArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let data = required(a.data, file.data.clone(), "data")?;
    let ds = load_dataset(&data)?;
    let offsets: BTreeMap<String, i64> = ds.trials.iter().map(|t| (t.trial.id.clone(), t.offset_us)).collect();
    let reference = if data.join(OFFSETS_FILE).exists() {
        let truth = read_offsets(&data)?;
        let errors: Vec<i64> = offsets
            .iter()
            .filter_map(|(id, o)| truth.get(id).map(|t| (o - t).abs()))
            .collect();
        Some(SyncComparison {
            compared: errors.len(),
            within_5ms: errors.iter().filter(|&&e| e <= 5000).count(),
            max_abs_error_us: errors.iter().copied().max().unwrap_or(0),
        })
    } else {
        None
    };
    let report = SyncReport {
        trials: offsets.len(),
        offsets_us: offsets,
        reference,
    };
    println!("synchronized {} trials", report.trials);
    if let Some(r) = &report.reference {
        println!(
            "recorded offsets: {}/{} within 5 ms, max error {} µs",
            r.within_5ms, r.compared, r.max_abs_error_us
        );
    }
    if let Some(out) = a.out.or(file.out.clone()) {
        create_dir(&out)?;
        write_json(&out.join("sync.json"), &report)?;
        write_record("sync", None, Some(&data), None, &out, &file)?;
    }
    Ok(())
}

fn parse_modalities(s: &str) -> CliResult<Vec<Modality>> {
    match s.to_ascii_lowercase().as_str() {
        "ensemble" | "both" => Ok(Modality::ALL.to_vec()),
        other => other
            .parse::<Modality>()
            .map(|m| vec![m])
            .map_err(|_| usage(format!("unknown modality \"{s}\" (expected pose, insole or ensemble)"))),
    }
}

fn parse_activity(s: &str) -> CliResult<Activity> {
    let a: Activity = s.parse().map_err(|_| usage(format!("unknown activity \"{s}\"")))?;
    if a == Activity::Null {
        return Err(usage("--activity must be walk, run, sts or stst"));
    }
    Ok(a)
}

fn train_classifier(a: TrainClassifierArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let data = required(a.data, file.data.clone(), "data")?;
    let out = required(a.out, file.out.clone(), "out")?;
    let seed = required(a.seed, file.seed, "seed")?;
    let mut task: ClassifierTask = layered(&ClassifierTask::default(), file.classifier.as_ref(), "classifier")?;
    if let Some(m) = a.modality.as_deref().or(file.modality.as_deref()) {
        task.modalities = parse_modalities(m)?;
    }
    let task = task.with_seed(seed);
    let ds = load_dataset(&data)?;
    let outcome = run_classifier_task(&ds, &task)?;
    write_classifier_outcome(&out, &task, &outcome)?;
    write_record("train-classifier", Some(seed), Some(&data), None, &out, &task)?;
    for m in Modality::ALL {
        if let Some(mm) = outcome.metrics.modality(m) {
            println!(
                "{m}: test accuracy {:.4} ({} windows), best epoch {}/{}",
                mm.test.accuracy, mm.test.n, mm.best_epoch, mm.epochs_run
            );
        }
    }
    println!(
        "ensemble: test accuracy {:.4} ({} windows), trial level {:.4}",
        outcome.metrics.ensemble.accuracy, outcome.metrics.ensemble.n, outcome.metrics.ensemble_trial_level.accuracy
    );
    Ok(())
}

fn train_kam(a: TrainKamArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let data = required(a.data, file.data.clone(), "data")?;
    let out = required(a.out, file.out.clone(), "out")?;
    let seed = required(a.seed, file.seed, "seed")?;
    let section_activity = file.kam.as_ref().and_then(|k| k.get("activity")).and_then(Value::as_str);
    let activity = match a.activity.as_deref().or(file.activity.as_deref()).or(section_activity) {
        Some(s) => parse_activity(s)?,
        None => return Err(usage("--activity is required")),
    };
    let default = KamTask {
        activity,
        model: Some(KamConfig::for_activity(activity)),
        ..KamTask::default()
    };
    let mut task: KamTask = layered(&default, file.kam.as_ref(), "kam")?;
    task.activity = activity;
    task.seed = seed;
    if a.knee_angle {
        task.with_knee_angle = true;
    } else if let Some(k) = file.knee_angle {
        task.with_knee_angle = k;
    }
    let ds = load_dataset(&data)?;
    let outcome = run_kam_task(&ds, &task)?;
    write_kam_outcome(&out, &task, &outcome)?;
    write_record(&format!("train-kam-{activity}"), Some(seed), Some(&data), None, &out, &task)?;
    let m = &outcome.metrics;
    println!(
        "{activity}{}: {} test strides, r {}, MAE {} Nm ({} %BW*ht), best epoch {}/{}",
        if task.with_knee_angle { " + knee angle" } else { "" },
        m.test.n_strides,
        m.test.r,
        m.test.mae_nm,
        m.test.mae_pct_bwht,
        m.best_epoch,
        m.epochs_run
    );
    Ok(())
}

fn model_paths(a: &ModelArgs, file: &FileConfig) -> CliResult<(PathBuf, PathBuf)> {
    let model = required(a.model.clone(), file.model.clone(), "model")?;
    let data = required(a.data.clone(), file.data.clone(), "data")?;
    if !model.is_dir() {
        return Err(CliError::Data(format!("{}: model directory not found", model.display())));
    }
    Ok((model, data))
}

fn evaluate(a: ModelArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let (model, data) = model_paths(&a, &file)?;
    let out = a.out.clone().or(file.out.clone()).unwrap_or_else(|| model.clone());
    let ds = load_dataset(&data)?;
    let report = evaluate_saved(&ds, &model)?;
    write_eval_report(&out, &report)?;
    write_record("evaluate", None, Some(&data), Some(&model), &out, &file)?;
    if let Some(c) = &report.classifier {
        for (name, m) in [("pose", &c.pose), ("insole", &c.insole)] {
            if let Some(m) = m {
                println!("{name}: test accuracy {:.4} ({} windows)", m.accuracy, m.n);
            }
        }
        println!("ensemble: test accuracy {:.4} ({} windows)", c.ensemble.accuracy, c.ensemble.n);
    }
    for k in &report.kam {
        println!(
            "{}: {} strides, r {}, MAE {} Nm ({} %BW*ht)",
            k.activity, k.n_strides, k.r, k.mae_nm, k.mae_pct_bwht
        );
    }
    Ok(())
}

fn infer(a: ModelArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let (model, data) = model_paths(&a, &file)?;
    let out = required(a.out.clone(), file.out.clone(), "out")?;
    let ds = load_dataset(&data)?;
    let outcome = infer_saved(&ds, &model)?;
    write_infer_outcome(&out, &outcome)?;
    write_record("infer", None, Some(&data), Some(&model), &out, &file)?;
    println!(
        "{} window predictions, {} stride predictions written to {}",
        outcome.windows.len(),
        outcome.strides.len(),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InspectReport {
    pub subjects: usize,
    pub trials: usize,
    pub trials_per_activity: BTreeMap<String, usize>,
    pub streams: BTreeMap<String, usize>,
    /// Files that could not be read or parsed.
    pub load_errors: Vec<String>,
    /// Validation violations, prefixed with the trial id.
    pub violations: Vec<String>,
}

impl InspectReport {
    pub fn is_clean(&self) -> bool {
        self.load_errors.is_empty() && self.violations.is_empty()
    }
}

fn inspect(a: DataArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let data = required(a.data, file.data.clone(), "data")?;
    let manifest = load_manifest_file(&data).map_err(|e| CliError::Data(e.to_string()))?;
    let results: Vec<_> = manifest
        .trials
        .par_iter()
        .map(|entry| match load_trial(&data, entry) {
            Ok(trial) => {
                let v: Vec<String> = validate_trial(&trial, &manifest)
                    .iter()
                    .map(|v| format!("{}: {v}", trial.id))
                    .collect();
                let streams = [
                    ("insole", trial.insole.is_some()),
                    ("pose", trial.pose.is_some()),
                    ("mocap", trial.mocap.is_some()),
                ];
                Ok((v, streams))
            }
            Err(e) => Err(format!("{}: {e}", entry.id)),
        })
        .collect();
    let mut report = InspectReport {
        subjects: manifest.subjects.len(),
        trials: manifest.trials.len(),
        trials_per_activity: BTreeMap::new(),
        streams: BTreeMap::new(),
        load_errors: Vec::new(),
        violations: Vec::new(),
    };
    for entry in &manifest.trials {
        *report.trials_per_activity.entry(entry.activity.to_string()).or_default() += 1;
    }
    for r in results {
        match r {
            Ok((v, streams)) => {
                report.violations.extend(v);
                for (name, present) in streams {
                    *report.streams.entry(name.to_string()).or_default() += present as usize;
                }
            }
            Err(e) => report.load_errors.push(e),
        }
    }
    println!("{} subjects, {} trials", report.subjects, report.trials);
    for (act, n) in &report.trials_per_activity {
        println!("  {act}: {n} trials");
    }
    for (s, n) in &report.streams {
        println!("  {s} streams: {n}");
    }
    for e in report.load_errors.iter().chain(&report.violations) {
        println!("  problem: {e}");
    }
    println!(
        "{} load errors, {} validation violations",
        report.load_errors.len(),
        report.violations.len()
    );
    if let Some(out) = a.out.or(file.out.clone()) {
        create_dir(&out)?;
        write_json(&out.join("inspect.json"), &report)?;
        write_record("inspect", None, Some(&data), None, &out, &file)?;
    }
    if report.is_clean() {
        Ok(())
    } else {
        Err(CliError::Data(format!("{}: dataset has problems", data.display())))
    }
}

/// Reads a JSON artifact written by a command, for tests and tooling.
pub fn read_artifact<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    read_json(path).map_err(CliError::from)
}
