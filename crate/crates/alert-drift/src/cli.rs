//! Command-line surface binding the pipeline end to end.
//!
//! Five subcommands: `train` fits and saves a representation model, `assess`
//! scores a candidate batch against a reference window, `synth` writes a
//! synthetic benchmark sequence, `bench` runs the full detector comparison,
//! and `sweep` grids network shapes on one drifted pair. The drift verdict is
//! reported through the exit code — 0 means no drift, 10 means retrain
//! advised — so shell pipelines can branch on it; every error class maps to
//! its own nonzero code. `synth`, `bench`, and `sweep` write a `manifest.json`
//! recording every seed and flag, and rerunning from that manifest reproduces
//! the artifacts byte for byte.

use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::alert::{assess, AssessParams};
use crate::bench::{default_detectors, default_plan, run_benchmark, sweep_mlp, BenchConfig};
use crate::data::{
    load_csv, BlobConfig, DatasetSequence, DriftKind, DriftScenario, SequencePlan,
};
use crate::error::{Error, Result};
use crate::repr::{MlpConfig, TrainedMlp};
use crate::stats::baselines::BaselineConfig;
use crate::stats::AggregationMode;

/// Parses arguments, dispatches, and returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Like [`run`] but parses an explicit argument vector; used by tests.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Maps each error class to its own exit code, leaving 0 for "no drift",
/// 10 for "drift detected", and clap's 2 shared with config errors.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Io { .. } => 3,
        Error::Csv { .. } => 4,
        Error::DimensionMismatch { .. } => 5,
        Error::InvalidInput(_) => 6,
        Error::ModelFormat(_) => 7,
    }
}

#[derive(Debug, Parser)]
#[command(name = "alert", version, about = "Feature-drift detection and retraining decisions")]
struct Cli {
    /// Print progress notes to stderr (repeatable).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a representation model on a labeled reference window.
    Train(TrainArgs),
    /// Score a candidate batch against a reference window with a saved model.
    Assess(AssessArgs),
    /// Synthesize a benchmark sequence directory.
    Synth(SynthArgs),
    /// Run every detector over a sequence and rank them by score.
    Bench(BenchArgs),
    /// Grid-search network shapes on one reference/candidate pair.
    Sweep(SweepArgs),
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Train(args) => cmd_train(args, cli.verbose),
        Command::Assess(args) => cmd_assess(args, cli.verbose),
        Command::Synth(args) => cmd_synth(args, cli.verbose),
        Command::Bench(args) => cmd_bench(args, cli.verbose),
        Command::Sweep(args) => cmd_sweep(args, cli.verbose),
    }
}

fn note(verbose: u8, msg: &str) {
    if verbose > 0 {
        eprintln!("{msg}");
    }
}

/// Writes to stdout, swallowing broken-pipe errors so `alert ... | head`
/// truncates quietly instead of panicking.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

/// Network shape flags shared by `train`; `--layers` counts all dense layers
/// including the output, so the default 3 means two hidden layers.
#[derive(Debug, Args)]
struct MlpArgs {
    /// Total dense layers including the output (at least 2).
    #[arg(long, default_value_t = 3)]
    layers: usize,
    /// Width of every hidden layer.
    #[arg(long, default_value_t = 20)]
    neurons: usize,
    /// Training epochs (0 leaves the network at its initialization).
    #[arg(long, default_value_t = 3)]
    epochs: usize,
    /// Minibatch size for the optimizer.
    #[arg(long, default_value_t = 20)]
    batch_size: usize,
    /// Seed for weight initialization and epoch shuffling.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl MlpArgs {
    fn to_config(&self) -> Result<MlpConfig> {
        if self.layers < 2 {
            return Err(Error::Config(format!(
                "--layers counts all dense layers including the output and must be at least 2, got {}",
                self.layers
            )));
        }
        Ok(MlpConfig::default()
            .with_hidden_layers(vec![self.neurons; self.layers - 1])
            .with_epochs(self.epochs)
            .with_batch_size(self.batch_size)
            .with_seed(self.seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AggChoice {
    Mean,
    Max,
}

impl From<AggChoice> for AggregationMode {
    fn from(choice: AggChoice) -> Self {
        match choice {
            AggChoice::Mean => AggregationMode::Mean,
            AggChoice::Max => AggregationMode::Max,
        }
    }
}

/// Assessment flags shared by `assess`, `bench`, and `sweep`.
#[derive(Debug, Args)]
struct AssessFlags {
    /// Retrain when the utility reaches this value.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Quantile bins for the PSI computations.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// How per-feature statistics collapse to one value.
    #[arg(long, value_enum, default_value_t = AggChoice::Mean)]
    agg: AggChoice,
}

impl AssessFlags {
    fn to_params(&self) -> AssessParams {
        AssessParams {
            threshold: self.threshold,
            num_bins: self.bins,
            aggregation: self.agg.into(),
            clip_layer: None,
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Labeled reference window (CSV with a header row).
    #[arg(long)]
    d0: PathBuf,
    /// Name of the label column.
    #[arg(long, default_value = "label")]
    label_col: String,
    /// Where to write the trained model (JSON).
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    mlp: MlpArgs,
}

fn cmd_train(args: &TrainArgs, verbose: u8) -> Result<i32> {
    let config = args.mlp.to_config()?;
    let data = load_csv(&args.d0, &args.label_col, None)?;
    note(
        verbose,
        &format!(
            "loaded {}: {} rows x {} features, {} classes",
            args.d0.display(),
            data.num_rows(),
            data.num_features(),
            data.num_classes()
        ),
    );
    let (model, history) = TrainedMlp::train_with_history(&data, config)?;
    for (epoch, loss) in history.iter().enumerate() {
        emit(&format!("epoch {:>3}  loss {loss:.6}\n", epoch + 1));
    }
    model.save(&args.model)?;
    emit(&format!("model written to {}\n", args.model.display()));
    Ok(0)
}

#[derive(Debug, Args)]
struct AssessArgs {
    /// Trained model file from `train`.
    #[arg(long)]
    model: PathBuf,
    /// Reference window CSV.
    #[arg(long)]
    d0: PathBuf,
    /// Candidate batch CSV (labels are present in the file but never read).
    #[arg(long)]
    d1: PathBuf,
    /// Name of the label column.
    #[arg(long, default_value = "label")]
    label_col: String,
    #[command(flatten)]
    flags: AssessFlags,
    /// Also write the verdict JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_assess(args: &AssessArgs, verbose: u8) -> Result<i32> {
    let model = TrainedMlp::load(&args.model)?;
    let d0 = load_csv(&args.d0, &args.label_col, None)?;
    let d1 = load_csv(&args.d1, &args.label_col, None)?;
    let params = args.flags.to_params();
    let verdict = assess(&model, &d0, &d1, &params)?;
    note(
        verbose,
        &format!("utility {:.4} against threshold {}", verdict.utility, verdict.threshold),
    );
    let json = to_pretty(&verdict)?;
    if let Some(out) = &args.out {
        write_text(out, &format!("{json}\n"))?;
    }
    emit(&format!("{json}\n"));
    Ok(if verdict.retrain { 10 } else { 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DriftKindChoice {
    None,
    Abrupt,
    Gradual,
    Shuffle,
}

impl From<DriftKindChoice> for DriftKind {
    fn from(choice: DriftKindChoice) -> Self {
        match choice {
            DriftKindChoice::None => DriftKind::None,
            DriftKindChoice::Abrupt => DriftKind::Abrupt,
            DriftKindChoice::Gradual => DriftKind::Gradual,
            DriftKindChoice::Shuffle => DriftKind::Shuffle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileChoice {
    /// The built-in benchmark corpus: four drift motifs cycling over ten
    /// drifted batches.
    Mixed,
    /// Every n-th batch drifted with one repeated scenario.
    Uniform,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory for the sequence.
    #[arg(long)]
    out: PathBuf,
    /// Name of the label column in the written CSVs.
    #[arg(long, default_value = "label")]
    label_col: String,
    /// Master seed for the sequence plan.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Which drift layout to generate.
    #[arg(long, value_enum, default_value_t = ProfileChoice::Mixed)]
    profile: ProfileChoice,
    /// Batches after the reference window.
    #[arg(long)]
    batches: Option<usize>,
    /// Rows per batch (and in the reference window).
    #[arg(long)]
    rows: Option<usize>,
    /// Uniform profile: drift every n-th batch.
    #[arg(long)]
    drift_every: Option<usize>,
    /// Uniform profile: the injected drift kind.
    #[arg(long, value_enum)]
    drift_kind: Option<DriftKindChoice>,
    /// Uniform profile: drift magnitude in feature units.
    #[arg(long, allow_negative_numbers = true)]
    magnitude: Option<f64>,
    /// Uniform profile: fraction of rows touched per drifted batch.
    #[arg(long)]
    fraction: Option<f64>,
    /// Rerun an earlier synth exactly as recorded (plan flags are ignored).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl SynthArgs {
    fn build_plan(&self) -> Result<SequencePlan> {
        match self.profile {
            ProfileChoice::Mixed => {
                if self.drift_every.is_some()
                    || self.drift_kind.is_some()
                    || self.magnitude.is_some()
                    || self.fraction.is_some()
                {
                    return Err(Error::Config(
                        "--drift-every, --drift-kind, --magnitude, and --fraction apply only to --profile uniform"
                            .into(),
                    ));
                }
                let mut plan = default_plan(self.seed);
                if let Some(batches) = self.batches {
                    plan.num_batches = batches;
                }
                if let Some(rows) = self.rows {
                    plan.rows_per_batch = rows;
                }
                plan.validate()?;
                Ok(plan)
            }
            ProfileChoice::Uniform => {
                let scenario = DriftScenario {
                    kind: self.drift_kind.unwrap_or(DriftKindChoice::Abrupt).into(),
                    magnitude: self.magnitude.unwrap_or(-6.0),
                    fraction_drifted: self.fraction.unwrap_or(1.0),
                    seed: self.seed.wrapping_add(1000),
                };
                SequencePlan::every_nth(
                    "uniform",
                    self.batches.unwrap_or(30),
                    self.rows.unwrap_or(500),
                    BlobConfig { seed: self.seed, ..BlobConfig::default() },
                    self.drift_every.unwrap_or(3),
                    scenario,
                    self.seed,
                )
            }
        }
    }
}

fn cmd_synth(args: &SynthArgs, verbose: u8) -> Result<i32> {
    let manifest = match &args.manifest {
        Some(path) => match read_manifest(path)? {
            m @ Manifest::Synth { .. } => m,
            _ => {
                return Err(Error::Config(format!(
                    "{} is not a synth manifest",
                    path.display()
                )))
            }
        },
        None => Manifest::Synth {
            label_col: args.label_col.clone(),
            plan: args.build_plan()?,
        },
    };
    let Manifest::Synth { label_col, plan } = &manifest else { unreachable!() };
    let sequence = plan.synthesize()?;
    sequence.save_dir(&args.out, label_col)?;
    write_json(&args.out.join("manifest.json"), &manifest)?;
    note(verbose, &format!("plan seed {}", plan.seed));
    let drifted: Vec<String> = sequence
        .drift_truth
        .iter()
        .enumerate()
        .filter(|(_, &t)| t)
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    emit(&format!(
        "wrote reference + {} batches to {} (drifted batches: {})\n",
        sequence.batches.len(),
        args.out.display(),
        if drifted.is_empty() { "none".to_string() } else { drifted.join(", ") }
    ));
    Ok(0)
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Sequence directory from `synth`; omit to use the built-in corpus.
    #[arg(long)]
    seq: Option<PathBuf>,
    /// Output directory for report and manifest.
    #[arg(long)]
    out: PathBuf,
    /// Name of the label column.
    #[arg(long, default_value = "label")]
    label_col: String,
    /// Plan seed for the built-in corpus (ignored with --seq or --manifest).
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Reward for a correct no-drift call; also the false-positive penalty.
    #[arg(long, default_value_t = 0.1)]
    ts: f64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    flags: AssessFlags,
    /// Rerun an earlier benchmark exactly as recorded.
    #[arg(long, conflicts_with = "seq")]
    manifest: Option<PathBuf>,
}

fn cmd_bench(args: &BenchArgs, verbose: u8) -> Result<i32> {
    let manifest = match &args.manifest {
        Some(path) => match read_manifest(path)? {
            m @ Manifest::Bench { .. } => m,
            _ => {
                return Err(Error::Config(format!(
                    "{} is not a bench manifest",
                    path.display()
                )))
            }
        },
        None => {
            let source = match &args.seq {
                Some(dir) => BenchSource::Dir { path: dir.display().to_string() },
                None => BenchSource::Plan { plan: default_plan(args.seed) },
            };
            Manifest::Bench {
                label_col: args.label_col.clone(),
                source,
                mlp: MlpConfig::default(),
                assess: args.flags.to_params(),
                baselines: BaselineConfig::default(),
                bench: BenchConfig { t_s: args.ts, jobs: args.jobs, ..BenchConfig::default() },
            }
        }
    };
    let Manifest::Bench { label_col, source, mlp, assess, baselines, bench } = &manifest else {
        unreachable!()
    };
    let sequence = match source {
        BenchSource::Plan { plan } => plan.synthesize()?,
        BenchSource::Dir { path } => DatasetSequence::load_dir(path, label_col)?,
    };
    note(
        verbose,
        &format!("sequence {}: {} batches", sequence.name, sequence.batches.len()),
    );
    let detectors = default_detectors(&sequence.reference, mlp.clone(), assess.clone(), baselines)?;
    let (report, timing) = run_benchmark(&sequence, &detectors, bench)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Error::io(args.out.display().to_string(), e))?;
    write_json(&args.out.join("report.json"), &report)?;
    write_text(&args.out.join("report.txt"), &report.render_text())?;
    write_text(&args.out.join("timing.txt"), &timing.render_text())?;
    write_json(&args.out.join("manifest.json"), &manifest)?;
    emit(&report.render_text());
    Ok(0)
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Reference window CSV.
    #[arg(long, required_unless_present = "manifest")]
    d0: Option<PathBuf>,
    /// Candidate batch CSV.
    #[arg(long, required_unless_present = "manifest")]
    d1: Option<PathBuf>,
    /// Name of the label column.
    #[arg(long, default_value = "label")]
    label_col: String,
    /// Comma-separated totals of dense layers to try.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    layers: Vec<usize>,
    /// Comma-separated hidden widths to try.
    #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
    neurons: Vec<usize>,
    /// Comma-separated epoch counts to try.
    #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
    epochs: Vec<usize>,
    /// Minibatch size shared by every grid point.
    #[arg(long, default_value_t = 20)]
    batch_size: usize,
    /// Seed shared by every grid point.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    flags: AssessFlags,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write grid.csv and the manifest to this directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rerun an earlier sweep exactly as recorded.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn cmd_sweep(args: &SweepArgs, verbose: u8) -> Result<i32> {
    let manifest = match &args.manifest {
        Some(path) => match read_manifest(path)? {
            m @ Manifest::Sweep { .. } => m,
            _ => {
                return Err(Error::Config(format!(
                    "{} is not a sweep manifest",
                    path.display()
                )))
            }
        },
        None => Manifest::Sweep {
            d0: args.d0.as_ref().expect("required by clap").display().to_string(),
            d1: args.d1.as_ref().expect("required by clap").display().to_string(),
            label_col: args.label_col.clone(),
            layers: args.layers.clone(),
            neurons: args.neurons.clone(),
            epochs: args.epochs.clone(),
            mlp: MlpConfig::default().with_batch_size(args.batch_size).with_seed(args.seed),
            assess: args.flags.to_params(),
            jobs: args.jobs,
        },
    };
    let Manifest::Sweep { d0, d1, label_col, layers, neurons, epochs, mlp, assess, jobs } =
        &manifest
    else {
        unreachable!()
    };
    let reference = load_csv(d0, label_col, None)?;
    let candidate = load_csv(d1, label_col, None)?;
    note(
        verbose,
        &format!("{} grid points", layers.len() * neurons.len() * epochs.len()),
    );
    let report = sweep_mlp(&reference, &candidate, layers, neurons, epochs, mlp, assess, *jobs)?;
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out.display().to_string(), e))?;
        report.write_csv(out.join("grid.csv"))?;
        write_json(&out.join("manifest.json"), &manifest)?;
    }
    emit(&report.to_csv());
    Ok(0)
}

/// On-disk record of everything a `synth`, `bench`, or `sweep` run depends
/// on; feeding it back through `--manifest` reproduces the run byte for byte.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Manifest {
    Synth {
        label_col: String,
        plan: SequencePlan,
    },
    Bench {
        label_col: String,
        source: BenchSource,
        mlp: MlpConfig,
        assess: AssessParams,
        baselines: BaselineConfig,
        bench: BenchConfig,
    },
    Sweep {
        d0: String,
        d1: String,
        label_col: String,
        layers: Vec<usize>,
        neurons: Vec<usize>,
        epochs: Vec<usize>,
        mlp: MlpConfig,
        assess: AssessParams,
        jobs: Option<usize>,
    },
}

/// Where a benchmark sequence comes from: a plan to resynthesize, or a
/// directory written earlier.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum BenchSource {
    Plan { plan: SequencePlan },
    Dir { path: String },
}

fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("manifest {}: {e}", path.display())))
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serializing output: {e}")))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
