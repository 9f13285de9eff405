//! Command-line front end. The `adathresh` binary is a one-line wrapper
//! around [`main`].

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calibration::{self, CalibrationResult, CvSelection};
use crate::embedding::{Embedding, LabeledEmbedding};
use crate::error::{Error, Result};
use crate::gallery::{Decision, Gallery};
use crate::io;
use crate::policy::ThresholdPolicy;
use crate::protocol::{self, ExperimentReport};
use crate::synth::{self, DatasetStats, SamplesPerClass, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "adathresh", version, about = "Adaptive-threshold face gallery tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled embedding dataset.
    Synth(SynthArgs),
    /// Pick a fixed threshold by k-fold cross-validation over sampled pairs.
    Calibrate(CalibrateArgs),
    /// Register dataset rows into a gallery snapshot, creating it if needed.
    Enroll(EnrollArgs),
    /// Recognize query vectors against a gallery snapshot.
    Identify(IdentifyArgs),
    /// Run the timeline evaluation over shuffled copies of a dataset.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Lfw,
    Adience,
    Feret,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of identities.
    #[arg(long, default_value_t = 900)]
    pub classes: usize,
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    /// Images per identity: fixed:N, geometric:MEAN or empirical:N1;N2;...
    #[arg(long, conflicts_with = "preset")]
    pub samples: Option<String>,
    /// Images-per-identity shape of a well-known dataset.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Within-identity concentration; larger is tighter.
    #[arg(long, default_value_t = 0.5)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Verification pairs to sample.
    #[arg(long, default_value_t = calibration::DEFAULT_PAIR_COUNT)]
    pub pairs: usize,
    #[arg(long, default_value_t = calibration::DEFAULT_FOLDS)]
    pub folds: usize,
    /// Target share of same-identity pairs.
    #[arg(long, default_value_t = calibration::DEFAULT_POSITIVE_FRACTION)]
    pub positive_fraction: f64,
    /// Fold side used to pick each threshold: train or test.
    #[arg(long, default_value = "train")]
    pub select_on: String,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, short)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub pairs: PairArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the full calibration result as JSON.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnrollArgs {
    #[arg(long, short)]
    pub snapshot: PathBuf,
    #[arg(long, short)]
    pub dataset: PathBuf,
    /// Initial threshold for a new gallery.
    #[arg(long)]
    pub init_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    #[arg(long, short)]
    pub snapshot: PathBuf,
    /// A single query vector, comma separated.
    #[arg(long, conflicts_with = "queries", allow_hyphen_values = true)]
    pub vector: Option<String>,
    /// A dataset file whose rows are used as queries (labels are ignored).
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Threshold policy: adaptive or fixed:VALUE.
    #[arg(long, default_value = "adaptive")]
    pub policy: String,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, short)]
    pub dataset: PathBuf,
    /// adaptive, fixed:VALUE, or both (fixed and adaptive on the same shuffles).
    #[arg(long, default_value = "both")]
    pub policy: String,
    /// Initial adaptive threshold (and the fixed threshold for `both`).
    /// Calibrated from the dataset when omitted.
    #[arg(long)]
    pub init_threshold: Option<f64>,
    #[command(flatten)]
    pub pairs: PairArgs,
    #[arg(long, default_value_t = protocol::DEFAULT_REPETITIONS)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Directory for per-run curve CSVs (`<policy>_runNN.csv`).
    #[arg(long)]
    pub curve_dir: Option<PathBuf>,
}

/// Everything `evaluate` writes to its JSON report.
#[derive(Debug, Serialize)]
pub struct EvaluationReport {
    pub dataset: DatasetStats,
    pub seed: u64,
    pub repetitions: usize,
    pub initial_threshold: f64,
    pub calibration: Option<CalibrationResult>,
    pub results: Vec<ExperimentReport>,
    /// Mean adaptive minus mean fixed accuracy, when both ran.
    pub adaptive_gain: Option<f64>,
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_precondition() { 3 } else { 2 })
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth_cmd(a),
        Command::Calibrate(a) => calibrate_cmd(a),
        Command::Enroll(a) => enroll_cmd(a),
        Command::Identify(a) => identify_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
    }
}

fn synth_cmd(a: SynthArgs) -> Result<()> {
    let samples_per_class = match (a.preset, a.samples) {
        (Some(Preset::Lfw), _) => SamplesPerClass::GeometricMean(synth::LFW_MEAN_PER_CLASS),
        (Some(Preset::Adience), _) => SamplesPerClass::GeometricMean(synth::ADIENCE_MEAN_PER_CLASS),
        (Some(Preset::Feret), _) => SamplesPerClass::GeometricMean(synth::FERET_MEAN_PER_CLASS),
        (None, Some(spec)) => spec.parse()?,
        (None, None) => SamplesPerClass::GeometricMean(synth::LFW_MEAN_PER_CLASS),
    };
    let config = SynthConfig {
        num_classes: a.classes,
        dim: a.dim,
        samples_per_class,
        concentration: a.kappa,
        seed: a.seed,
    };
    let data = synth::generate(&config)?;
    io::save_dataset(&a.output, &data)?;
    println!("{}: {}", a.output.display(), synth::summarize(&data)?);
    Ok(())
}

fn calibrate_on(data: &[LabeledEmbedding], p: &PairArgs, seed: u64) -> Result<CalibrationResult> {
    let select_on: CvSelection = p.select_on.parse()?;
    let pairs = calibration::sample_pairs_with(data, p.pairs, p.positive_fraction, seed)?;
    calibration::calibrate_with(&pairs, p.folds, seed, select_on)
}

fn calibrate_cmd(a: CalibrateArgs) -> Result<()> {
    let data = io::load_dataset(&a.dataset)?;
    let result = calibrate_on(&data, &a.pairs, a.seed)?;
    let mean_acc = result.per_fold_accuracy.iter().sum::<f64>() / result.per_fold_accuracy.len() as f64;
    println!(
        "threshold {} ({} pairs, {} folds, mean held-out accuracy {:.4})",
        result.threshold,
        result.pair_count,
        result.per_fold_thresholds.len(),
        mean_acc
    );
    if let Some(path) = &a.output {
        io::save_report(path, &result)?;
    }
    Ok(())
}

fn enroll_cmd(a: EnrollArgs) -> Result<()> {
    let mut gallery = if a.snapshot.exists() {
        io::load_gallery(&a.snapshot)?
    } else {
        let init = a.init_threshold.ok_or_else(|| {
            Error::InvalidConfig(format!(
                "{} does not exist; pass --init-threshold to create it",
                a.snapshot.display()
            ))
        })?;
        Gallery::new(init)?
    };
    let data = io::load_dataset(&a.dataset)?;
    let added = data.len();
    for item in data {
        gallery.register(item)?;
    }
    io::save_gallery(&a.snapshot, &gallery)?;
    println!(
        "enrolled {added} embeddings; gallery now holds {} entries of {} identities",
        gallery.len(),
        gallery.identity_count()
    );
    Ok(())
}

fn identify_cmd(a: IdentifyArgs) -> Result<()> {
    let gallery = io::load_gallery(&a.snapshot)?;
    let policy: ThresholdPolicy = a.policy.parse()?;
    let queries: Vec<(String, Embedding)> = match (&a.vector, &a.queries) {
        (Some(v), _) => {
            let values = v
                .split(',')
                .map(|x| {
                    x.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line: 1,
                        message: format!("not a number: {x:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            vec![("query".to_string(), Embedding::normalize(&values)?)]
        }
        (None, Some(path)) => io::load_dataset(path)?
            .into_iter()
            .map(|d| (d.source_id, d.embedding))
            .collect(),
        (None, None) => return Err(Error::InvalidConfig("pass --vector or --queries".into())),
    };
    for (id, query) in &queries {
        let r = gallery.recognize_with(query, &policy)?;
        let who = match &r.decision {
            Decision::Identified(label) => label.as_str(),
            Decision::Intruder => "intruder",
        };
        println!("{id}\t{who}\tscore={}\tthreshold={}", r.score, r.threshold_used);
    }
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let data = io::load_dataset(&a.dataset)?;
    let stats = synth::summarize(&data)?;
    let wants_both = a.policy == "both";
    let explicit: Option<ThresholdPolicy> = if wants_both { None } else { Some(a.policy.parse()?) };

    let mut calibration = None;
    let initial_threshold = match (a.init_threshold, explicit) {
        (Some(t), _) => t,
        (None, Some(ThresholdPolicy::Fixed(c))) => c,
        (None, _) => {
            let result = calibrate_on(&data, &a.pairs, a.seed)?;
            let t = result.threshold;
            calibration = Some(result);
            t
        }
    };

    let results = match explicit {
        None => {
            let c = protocol::run_comparison(&data, initial_threshold, a.repetitions, a.seed)?;
            vec![c.adaptive, c.fixed]
        }
        Some(policy) => vec![protocol::run_experiment(
            &data,
            policy,
            initial_threshold,
            a.repetitions,
            a.seed,
        )?],
    };
    for r in &results {
        println!(
            "{:<8} mean ACC {:.4} ± {:.4} over {} runs",
            r.policy.name(),
            r.mean_acc,
            r.std_acc,
            r.repetitions
        );
    }
    if let Some(dir) = &a.curve_dir {
        write_curves(dir, &results)?;
    }
    let adaptive_gain = wants_both.then(|| results[0].mean_acc - results[1].mean_acc);
    if let Some(path) = &a.report {
        let report = EvaluationReport {
            dataset: stats,
            seed: a.seed,
            repetitions: a.repetitions,
            initial_threshold,
            calibration,
            results,
            adaptive_gain,
        };
        io::save_report(path, &report)?;
    }
    Ok(())
}

fn write_curves(dir: &Path, results: &[ExperimentReport]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for r in results {
        for (i, run) in r.runs.iter().enumerate() {
            io::save_curve(dir.join(format!("{}_run{:02}.csv", r.policy.name(), i)), run)?;
        }
    }
    Ok(())
}
