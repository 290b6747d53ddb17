use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use subkernel::{CensorKind, DEFAULT_ENUMERATION_BUDGET, DEFAULT_REGULARIZATION};

/// Submodular kernels for ranked data.
///
/// Exit codes: 0 success, 2 usage error, 3 input data error, 4 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "subkernel", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a labelled food-preference dataset.
    Synth(SynthArgs),
    /// Build the information graph from an object feature CSV.
    Graph(GraphCmdArgs),
    /// Export feature maps of a rankings file.
    Featmap(FeatmapArgs),
    /// Compute a Gram matrix and a timing report.
    Gram(GramArgs),
    /// Train and score kernel ridge classifiers over seeds and noise levels.
    Classify(ClassifyArgs),
    /// Time Gram assembly over a grid of dataset sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelArg {
    Submodular,
    Kendall,
    Mallows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Bin,
}

pub fn censor_kind(s: &str) -> Result<String, String> {
    s.parse::<CensorKind>().map(|k| k.to_string()).map_err(|e| e.to_string())
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
        _ => Err(format!("expected a finite non-negative number, got {s:?}")),
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a finite positive number, got {s:?}")),
    }
}

fn fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x <= 1.0 => Ok(x),
        _ => Err(format!("expected a number in (0, 1], got {s:?}")),
    }
}

fn open_fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x < 1.0 => Ok(x),
        _ => Err(format!("expected a number in (0, 1), got {s:?}")),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Number of rankings, half per user type (odd values are rounded down).
    #[arg(long, default_value_t = 250, value_parser = clap::value_parser!(u64).range(2..))]
    pub m: u64,
    /// Standard deviation of the score noise.
    #[arg(long, default_value_t = 0.5, value_parser = non_negative)]
    pub sigma: f64,
    /// Ranking kind: full, top<k>, exh-interleave<l> or interleave<l>.
    #[arg(long, default_value = "full", value_parser = censor_kind)]
    pub kind: String,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for rankings.txt, labels.csv, features.csv and config.json.
    #[arg(long)]
    pub out: PathBuf,
}

/// Information-graph construction flags.
#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphOpts {
    /// Object feature CSV (id,f1,...,fd).
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Squared-exponential lengthscale; the median pairwise distance when absent.
    #[arg(long, value_parser = positive)]
    pub lengthscale: Option<f64>,
    /// Fraction of heaviest edges kept.
    #[arg(long, default_value_t = 1.0, value_parser = fraction)]
    pub keep_fraction: f64,
}

/// How non-exhaustive rankings are expanded.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ExtensionOpts {
    /// Exact enumeration of coherent extensions, or Monte-Carlo sampling.
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Samples per ranking in sampled mode.
    #[arg(long, default_value_t = 600, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Largest number of extensions enumerated per ranking in exact mode.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphCmdArgs {
    #[command(flatten)]
    pub graph: GraphOpts,
    /// Output directory for graph.txt and config.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FeatmapArgs {
    /// Rankings file.
    #[arg(long)]
    pub rankings: PathBuf,
    #[command(flatten)]
    pub graph: GraphOpts,
    #[command(flatten)]
    pub extension: ExtensionOpts,
    /// Seed for sampled mode.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Export only this ranking (0-based row) as object_id,value.
    #[arg(long)]
    pub index: Option<usize>,
    /// Output directory for the feature-map CSV and config.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GramArgs {
    /// Rankings file.
    #[arg(long)]
    pub rankings: PathBuf,
    /// Kernel.
    #[arg(long, value_enum, default_value_t = KernelArg::Submodular)]
    pub kernel: KernelArg,
    /// Mallows bandwidth.
    #[arg(long, default_value_t = 1.0, value_parser = non_negative)]
    pub lambda: f64,
    #[command(flatten)]
    pub graph: GraphOpts,
    #[command(flatten)]
    pub extension: ExtensionOpts,
    /// Seed for sampled mode.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; all cores when absent. Results do not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Matrix file format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output directory for the matrix, timing.csv and config.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    /// Rankings file; synthetic food data is generated per (seed, sigma) when absent.
    #[arg(long, requires = "labels", conflicts_with = "gram")]
    pub rankings: Option<PathBuf>,
    /// Labels CSV for --rankings or --gram.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Precomputed Gram matrix (.bin for binary, CSV otherwise).
    #[arg(long, requires = "labels")]
    pub gram: Option<PathBuf>,
    /// Kernels, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "submodular,kendall")]
    pub kernels: Vec<KernelArg>,
    /// Mallows bandwidth.
    #[arg(long, default_value_t = 1.0, value_parser = non_negative)]
    pub lambda: f64,
    /// Also report a coin-flip baseline.
    #[arg(long)]
    pub dummy: bool,
    /// Seeds, comma separated; each drives data generation, sampling and the split.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5")]
    pub seeds: Vec<u64>,
    /// Noise levels for synthetic data, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5", value_parser = non_negative)]
    pub sigmas: Vec<f64>,
    /// Synthetic dataset size.
    #[arg(long, default_value_t = 250, value_parser = clap::value_parser!(u64).range(2..))]
    pub m: u64,
    /// Synthetic ranking kind.
    #[arg(long, default_value = "full", value_parser = censor_kind)]
    pub kind: String,
    /// Held-out fraction.
    #[arg(long, default_value_t = 0.2, value_parser = open_fraction)]
    pub test_fraction: f64,
    /// Ridge regularisation.
    #[arg(long, default_value_t = DEFAULT_REGULARIZATION, value_parser = positive)]
    pub reg: f64,
    #[command(flatten)]
    pub graph: GraphOpts,
    #[command(flatten)]
    pub extension: ExtensionOpts,
    /// Worker threads; all cores when absent.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Output directory for metrics.csv and config.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Dataset sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
    pub grid: Vec<u64>,
    /// Kernels, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "submodular")]
    pub kernels: Vec<KernelArg>,
    /// Mallows bandwidth.
    #[arg(long, default_value_t = 1.0, value_parser = non_negative)]
    pub lambda: f64,
    /// Ranking kind of the synthetic data.
    #[arg(long, default_value = "full", value_parser = censor_kind)]
    pub kind: String,
    /// Noise level of the synthetic data.
    #[arg(long, default_value_t = 0.5, value_parser = non_negative)]
    pub sigma: f64,
    /// Seed for data generation and sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Timed repetitions after one discarded warm-up; the median is reported.
    #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    /// Seconds after which a configuration is recorded as NA and larger sizes are skipped.
    #[arg(long, value_parser = positive)]
    pub timeout: Option<f64>,
    #[command(flatten)]
    pub graph: GraphOpts,
    #[command(flatten)]
    pub extension: ExtensionOpts,
    /// Worker threads; all cores when absent.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Output directory for timing.csv and config.json.
    #[arg(long)]
    pub out: PathBuf,
}
