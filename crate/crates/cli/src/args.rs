use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mimarkov::benchmark::{Estimator, Preset, Settings};

#[derive(Debug, Parser)]
#[command(name = "mimarkov", version, about = "Minimum information Markov models: simulate, fit, select, benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a Gaussian AR or VAR series to CSV.
    Simulate(SimulateArgs),
    /// Estimate the dependence parameters of one spec.
    Fit(FitArgs),
    /// Rank candidate specs by pseudo-likelihood AIC and PIC.
    Select(SelectArgs),
    /// Run a replication benchmark from a preset or manifest.
    Benchmark(BenchmarkArgs),
    /// Run the built-in invariant checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Classical AR coefficients, e.g. `--ar 0.5,0.3`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "sigma2")]
    pub ar: Option<Vec<f64>>,
    /// Innovation variance for `--ar`.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Minimum-information AR coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "tau2", conflicts_with = "ar")]
    pub theta: Option<Vec<f64>>,
    /// Stationary variance for `--theta`.
    #[arg(long)]
    pub tau2: Option<f64>,
    /// VAR(1) coefficient and noise covariance matrices as CSV files.
    #[arg(long, num_args = 2, value_names = ["A_CSV", "SIGMA_CSV"], conflicts_with_all = ["ar", "theta"])]
    pub var1: Option<Vec<PathBuf>>,
    /// Parameter file in `key=value` form.
    #[arg(long, conflicts_with_all = ["ar", "theta", "var1"])]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra discarded steps; 0 uses an exact stationary start where
    /// available.
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    /// Output CSV; a `<out>.meta.json` sidecar is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

/// Hyperparameter flags shared by estimation commands.
#[derive(Debug, Clone, Default, Args)]
pub struct HyperArgs {
    /// SGD learning rate.
    #[arg(long)]
    pub eta: Option<f64>,
    /// SGD iterations.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Gradient-ascent initial learning rate.
    #[arg(long)]
    pub lr0: Option<f64>,
    /// Gradient-ascent inverse-time decay.
    #[arg(long)]
    pub decay: Option<f64>,
    /// Exchange-chain burn-in.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Exchange-chain samples per scoring iteration.
    #[arg(long)]
    pub samples: Option<usize>,
}

impl HyperArgs {
    pub fn settings(&self) -> Settings {
        Settings {
            eta: self.eta,
            iters: self.iters,
            lr0: self.lr0,
            decay: self.decay,
            burn_in: self.burn_in,
            samples: self.samples,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Data CSV (column kinds from `<data>.kinds` if present).
    #[arg(long)]
    pub data: PathBuf,
    /// Spec file, or `ar:<d>` / `var1` shorthands.
    #[arg(long)]
    pub spec: String,
    #[arg(long, value_parser = parse_estimator)]
    pub estimator: Option<Estimator>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long)]
    pub time_limit_s: Option<f64>,
    /// Standard-scale real columns before fitting.
    #[arg(long)]
    pub standardize: bool,
    /// TOML file with defaults for any of the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Per-iteration CSV (mcle only).
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
    /// Result JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Candidate spec files or shorthands (at least two).
    #[arg(long, num_args = 1.., required = true)]
    pub spec: Vec<String>,
    /// ple-naive, ple-bipartition or ple-sgd.
    #[arg(long, value_parser = parse_estimator)]
    pub estimator: Option<Estimator>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long)]
    pub time_limit_s: Option<f64>,
    #[arg(long)]
    pub standardize: bool,
    /// Fit every spec on the pairs inside the largest order's margin.
    #[arg(long)]
    pub common_margin: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output prefix: writes `<out>.csv`, `<out>.txt` and `<out>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_parser = parse_preset, conflicts_with = "manifest", required_unless_present = "manifest")]
    pub preset: Option<Preset>,
    /// TOML manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Override every cell's repetitions.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub time_limit_s: Option<f64>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Riccati tolerance used by the VAR(1) checks.
    #[arg(long)]
    pub riccati_tol: Option<f64>,
    /// Report JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_estimator(s: &str) -> Result<Estimator, String> {
    s.parse().map_err(|e: mimarkov::Error| e.to_string())
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: mimarkov::Error| e.to_string())
}
