//! Replication benchmarks: simulate from a known Gaussian model, estimate,
//! and tabulate mean estimation error and time per (model, n, estimator).

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clock::Instant;
use crate::error::{Error, ErrorKind, Result};
use crate::gaussian::{
    ard_to_mininfo, simulate_ar, simulate_var, var1_to_mininfo, ClassicalArParams, ClassicalVarParams,
};
use crate::mcle::{fisher_scoring, ExchangeConfig, ScoringConfig};
use crate::oracle::{mle_ols_ar, mle_ols_var};
use crate::ple::{fit_bipartition, fit_naive, fit_online_sgd, GdConfig, SgdConfig};
use crate::series::TimeSeries;
use crate::spec::{kron_spec, DependenceSpec};

pub const DEFAULT_TIME_LIMIT_S: f64 = 900.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Mle,
    Mcle,
    PleNaive,
    PleBipartition,
    PleSgd,
}

impl Estimator {
    pub const ALL: [Estimator; 5] =
        [Self::Mle, Self::Mcle, Self::PleNaive, Self::PleBipartition, Self::PleSgd];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mle => "mle",
            Self::Mcle => "mcle",
            Self::PleNaive => "ple-naive",
            Self::PleBipartition => "ple-bipartition",
            Self::PleSgd => "ple-sgd",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown estimator `{s}` (expected mle, mcle, ple-naive, ple-bipartition or ple-sgd)")))
    }
}

/// Ground-truth Gaussian model of a benchmark cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrueModel {
    Ar { phi: Vec<f64>, sigma2: f64 },
    /// VAR(1) with row-major `a` and `sigma`.
    Var1 { a: Vec<Vec<f64>>, sigma: Vec<Vec<f64>> },
}

fn matrix(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>> {
    let p = rows.len();
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(Error::Shape(format!("{name} must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
}

/// A validated true model with its dependence spec and `θ*`.
#[derive(Debug, Clone)]
pub struct Truth {
    pub spec: DependenceSpec,
    pub theta: Vec<f64>,
    model: Classical,
}

#[derive(Debug, Clone)]
enum Classical {
    Ar(ClassicalArParams),
    Var(ClassicalVarParams),
}

impl TrueModel {
    pub fn truth(&self) -> Result<Truth> {
        match self {
            Self::Ar { phi, sigma2 } => {
                let c = ClassicalArParams::new(phi.clone(), *sigma2)?;
                let theta = ard_to_mininfo(&c)?.theta().to_vec();
                Ok(Truth { spec: DependenceSpec::ar(c.order())?, theta, model: Classical::Ar(c) })
            }
            Self::Var1 { a, sigma } => {
                let c = ClassicalVarParams::new(vec![matrix(a, "a")?], matrix(sigma, "sigma")?)?;
                let theta = var1_to_mininfo(&c)?.theta_vec();
                Ok(Truth { spec: kron_spec(c.dim(), &[(1, 1, 1)])?, theta, model: Classical::Var(c) })
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Ar { phi, sigma2 } => format!("phi={phi:?} sigma2={sigma2}"),
            Self::Var1 { a, sigma } => format!("A={a:?} Sigma={sigma:?}"),
        }
    }
}

impl Truth {
    pub fn simulate(&self, n: usize, seed: u64) -> Result<TimeSeries> {
        match &self.model {
            Classical::Ar(c) => simulate_ar(c, n, 0, seed),
            Classical::Var(c) => simulate_var(c, n, 0, seed),
        }
    }
}

/// Estimator hyperparameters; unset fields take library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub eta: Option<f64>,
    pub iters: Option<usize>,
    pub lr0: Option<f64>,
    pub decay: Option<f64>,
    pub burn_in: Option<usize>,
    pub samples: Option<usize>,
}

impl Settings {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(&self, over: &Settings) -> Settings {
        Settings {
            eta: over.eta.or(self.eta),
            iters: over.iters.or(self.iters),
            lr0: over.lr0.or(self.lr0),
            decay: over.decay.or(self.decay),
            burn_in: over.burn_in.or(self.burn_in),
            samples: over.samples.or(self.samples),
        }
    }

    pub fn gd(&self, time_limit_s: Option<f64>) -> GdConfig {
        let d = GdConfig::default();
        GdConfig { lr0: self.lr0.unwrap_or(d.lr0), decay: self.decay.unwrap_or(d.decay), time_limit_s, ..d }
    }

    pub fn sgd(&self, seed: u64) -> SgdConfig {
        let d = SgdConfig::default();
        SgdConfig { eta: self.eta.unwrap_or(d.eta), n_iters: self.iters.unwrap_or(d.n_iters), seed }
    }

    pub fn exchange(&self, seed: u64) -> ExchangeConfig {
        let d = ExchangeConfig::default();
        ExchangeConfig {
            n_samples: self.samples.unwrap_or(d.n_samples),
            burn_in: self.burn_in.unwrap_or(d.burn_in),
            seed,
            ..d
        }
    }

    fn tag(&self, e: Estimator) -> String {
        match e {
            Estimator::PleSgd => {
                let c = self.sgd(0);
                format!("ple-sgd(eta={},iters={})", c.eta, c.n_iters)
            }
            other => other.name().to_string(),
        }
    }
}

/// Runs one estimator and returns `θ̂` and the fitting time in seconds.
pub fn estimate(
    estimator: Estimator,
    spec: &DependenceSpec,
    series: &TimeSeries,
    settings: &Settings,
    seed: u64,
    time_limit_s: Option<f64>,
) -> Result<(Vec<f64>, f64)> {
    let started = Instant::now();
    let theta = match estimator {
        Estimator::Mle => mle_theta(spec, series)?,
        Estimator::Mcle => {
            let scoring = ScoringConfig { time_limit_s, ..Default::default() };
            fisher_scoring(spec, series, &vec![0.0; spec.k()], &settings.exchange(seed), &scoring)?.theta_hat
        }
        Estimator::PleNaive => fit_naive(spec, series, &settings.gd(time_limit_s))?.theta_hat,
        Estimator::PleBipartition => fit_bipartition(spec, series, seed, &settings.gd(time_limit_s))?.theta_hat,
        Estimator::PleSgd => fit_online_sgd(spec, series, &settings.sgd(seed))?.theta_hat,
    };
    Ok((theta, started.elapsed().as_secs_f64()))
}

/// Least-squares estimate mapped to minimum-information coordinates; only
/// the AR(d) and VAR(1) Kronecker specs have such a map.
fn mle_theta(spec: &DependenceSpec, series: &TimeSeries) -> Result<Vec<f64>> {
    let d = spec.order();
    if series.dim() == 1 && *spec == DependenceSpec::ar(d)? {
        return Ok(mle_ols_ar(series, d)?.1.theta().to_vec());
    }
    if d == 1 && *spec == kron_spec(series.dim(), &[(1, 1, 1)])? {
        let (_, m) = mle_ols_var(series, 1)?;
        return Ok(m.ok_or_else(|| Error::Internal("VAR(1) fit without minimum-information form".into()))?.theta_vec());
    }
    Err(Error::Config("mle is only available for the AR(d) and VAR(1) dependence specs".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub label: String,
    pub model: TrueModel,
    pub n: Vec<usize>,
    pub estimators: Vec<Estimator>,
    pub reps: usize,
    #[serde(default)]
    pub settings: Settings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
    #[serde(rename = "cell")]
    pub cells: Vec<Cell>,
}

fn default_time_limit() -> f64 {
    DEFAULT_TIME_LIMIT_S
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let m: Manifest = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::Config("manifest has no cells".into()));
        }
        if !(self.time_limit_s > 0.0) {
            return Err(Error::Config("time_limit_s must be positive".into()));
        }
        for c in &self.cells {
            if c.reps == 0 {
                return Err(Error::Config(format!("cell `{}` has zero repetitions", c.label)));
            }
            if c.n.is_empty() || c.estimators.is_empty() {
                return Err(Error::Config(format!("cell `{}` needs at least one n and one estimator", c.label)));
            }
            let truth = c.model.truth()?;
            let need = 2 * truth.spec.order() + 2;
            if let Some(&n) = c.n.iter().find(|&&n| n < need) {
                return Err(Error::Config(format!("cell `{}`: n = {n} is below {need}", c.label)));
            }
            if c.settings.eta.is_some_and(|v| !(v > 0.0)) || c.settings.iters == Some(0) {
                return Err(Error::Config(format!("cell `{}`: eta and iters must be positive", c.label)));
            }
        }
        Ok(())
    }

    /// Replaces every cell's repetition count.
    pub fn with_reps(mut self, reps: usize) -> Self {
        self.cells.iter_mut().for_each(|c| c.reps = reps);
        self
    }

    /// Overlays `settings` onto every cell.
    pub fn with_settings(mut self, settings: &Settings) -> Self {
        self.cells.iter_mut().for_each(|c| c.settings = c.settings.overlay(settings));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Table1,
    Table2,
    Table3,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Self::Table1),
            "table2" => Ok(Self::Table2),
            "table3" => Ok(Self::Table3),
            _ => Err(Error::Config(format!("unknown preset `{s}` (expected table1, table2 or table3)"))),
        }
    }
}

fn ar_truths() -> [(&'static str, TrueModel); 3] {
    [
        ("AR(1)", TrueModel::Ar { phi: vec![0.5], sigma2: 0.5 }),
        ("AR(2)", TrueModel::Ar { phi: vec![0.5, 0.3], sigma2: 0.5 }),
        ("AR(3)", TrueModel::Ar { phi: vec![0.5, 0.3, 0.1], sigma2: 0.5 }),
    ]
}

impl Preset {
    pub fn manifest(self) -> Manifest {
        use Estimator::*;
        let cell = |label: &str, model: TrueModel, n: Vec<usize>, estimators: Vec<Estimator>, settings: Settings| Cell {
            label: label.to_string(),
            model,
            n,
            estimators,
            reps: 30,
            settings,
        };
        let cells = match self {
            Self::Table1 => {
                let mut cells: Vec<Cell> = ar_truths()
                    .into_iter()
                    .map(|(l, m)| cell(l, m, vec![100, 1000], vec![Mle, Mcle, PleNaive], Settings::default()))
                    .collect();
                cells.push(cell(
                    "VAR(1)",
                    TrueModel::Var1 { a: vec![vec![0.5, 0.1], vec![0.1, 0.5]], sigma: vec![vec![0.5, 0.0], vec![0.0, 0.5]] },
                    vec![100, 1000],
                    vec![Mle, Mcle, PleNaive],
                    Settings::default(),
                ));
                cells
            }
            Self::Table2 => {
                let mut cells = Vec::new();
                for eta in [0.001, 0.01, 0.1] {
                    for iters in [1_000, 10_000, 100_000, 1_000_000] {
                        cells.push(cell(
                            &format!("AR(1) eta={eta} iters={iters}"),
                            TrueModel::Ar { phi: vec![0.5], sigma2: 0.5 },
                            vec![1000],
                            vec![PleSgd],
                            Settings { eta: Some(eta), iters: Some(iters), ..Default::default() },
                        ));
                    }
                }
                cells
            }
            Self::Table3 => ar_truths()
                .into_iter()
                .map(|(l, m)| {
                    cell(
                        l,
                        m,
                        vec![1000, 10_000, 100_000],
                        vec![PleBipartition, PleSgd],
                        Settings { eta: Some(0.01), iters: Some(10_000), ..Default::default() },
                    )
                })
                .collect(),
        };
        let name = match self {
            Self::Table1 => "table1",
            Self::Table2 => "table2",
            Self::Table3 => "table3",
        };
        Manifest { name: name.into(), seed: 0, time_limit_s: DEFAULT_TIME_LIMIT_S, cells }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub label: String,
    pub true_params: String,
    pub n: usize,
    pub estimator: String,
    pub reps: usize,
    pub completed: usize,
    /// Set when a run hit the time limit; the cell is then reported as `--`.
    pub timed_out: bool,
    pub mean_error: Option<f64>,
    pub sd_error: Option<f64>,
    pub mean_time_s: Option<f64>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub manifest: Manifest,
    pub rows: Vec<BenchmarkRow>,
}

enum Outcome {
    Done { error: f64, seconds: f64 },
    TimedOut,
    Skipped,
    Failed(String),
}

/// Executes the manifest on the current rayon pool, one task per
/// (cell, n, estimator, repetition). Once a repetition times out, the
/// remaining repetitions of that cell are skipped.
pub fn run(manifest: &Manifest) -> Result<BenchmarkReport> {
    manifest.validate()?;
    struct Job {
        cell: usize,
        n: usize,
        estimator: Estimator,
    }
    let truths: Vec<Truth> = manifest.cells.iter().map(|c| c.model.truth()).collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (ci, c) in manifest.cells.iter().enumerate() {
        for &n in &c.n {
            for &estimator in &c.estimators {
                jobs.push(Job { cell: ci, n, estimator });
            }
        }
    }
    let flags: Vec<AtomicBool> = jobs.iter().map(|_| AtomicBool::new(false)).collect();
    let tasks: Vec<(usize, usize)> =
        jobs.iter().enumerate().flat_map(|(j, job)| (0..manifest.cells[job.cell].reps).map(move |r| (j, r))).collect();

    let outcomes: Vec<(usize, usize, Outcome)> = tasks
        .par_iter()
        .map(|&(j, rep)| {
            let job = &jobs[j];
            if flags[j].load(Ordering::Relaxed) {
                return (j, rep, Outcome::Skipped);
            }
            let truth = &truths[job.cell];
            let cell = &manifest.cells[job.cell];
            // The same data seed across estimators keeps comparisons paired.
            let data_seed = manifest.seed.wrapping_add(rep as u64);
            let fit_seed = data_seed ^ 0x5DEE_CE66_D1CE_4E5B;
            let outcome = truth.simulate(job.n, data_seed).and_then(|series| {
                estimate(job.estimator, &truth.spec, &series, &cell.settings, fit_seed, Some(manifest.time_limit_s))
            });
            let outcome = match outcome {
                Ok((_, seconds)) if seconds > manifest.time_limit_s => {
                    flags[j].store(true, Ordering::Relaxed);
                    Outcome::TimedOut
                }
                Ok((theta, seconds)) => {
                    let error = theta.iter().zip(&truth.theta).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    Outcome::Done { error, seconds }
                }
                Err(e) if e.kind() == ErrorKind::Timeout => {
                    flags[j].store(true, Ordering::Relaxed);
                    Outcome::TimedOut
                }
                Err(e) => Outcome::Failed(format!("rep {rep}: {e}")),
            };
            (j, rep, outcome)
        })
        .collect();

    let mut by_job: BTreeMap<usize, Vec<(usize, Outcome)>> = BTreeMap::new();
    for (j, rep, o) in outcomes {
        by_job.entry(j).or_default().push((rep, o));
    }
    let rows = jobs
        .iter()
        .enumerate()
        .map(|(j, job)| {
            let cell = &manifest.cells[job.cell];
            let mut results = by_job.remove(&j).unwrap_or_default();
            results.sort_by_key(|(rep, _)| *rep);
            let mut errors = Vec::new();
            let mut times = Vec::new();
            let mut failures = Vec::new();
            let mut timed_out = false;
            for (_, o) in results {
                match o {
                    Outcome::Done { error, seconds } => {
                        errors.push(error);
                        times.push(seconds);
                    }
                    Outcome::TimedOut => timed_out = true,
                    Outcome::Skipped => {}
                    Outcome::Failed(msg) => failures.push(msg),
                }
            }
            let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
            let mean_error = if timed_out { None } else { mean(&errors) };
            let sd_error = match (mean_error, errors.len()) {
                (Some(m), l) if l > 1 => {
                    Some((errors.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / (l - 1) as f64).sqrt())
                }
                _ => None,
            };
            BenchmarkRow {
                label: cell.label.clone(),
                true_params: cell.model.describe(),
                n: job.n,
                estimator: cell.settings.tag(job.estimator),
                reps: cell.reps,
                completed: errors.len(),
                timed_out,
                mean_error,
                sd_error,
                mean_time_s: if timed_out { None } else { mean(&times) },
                failures,
            }
        })
        .collect();
    Ok(BenchmarkReport { schema_version: crate::ple::SCHEMA_VERSION, manifest: manifest.clone(), rows })
}

fn cell_text(v: Option<f64>) -> String {
    v.map_or_else(|| "--".to_string(), |v| format!("{v:.4}"))
}

impl BenchmarkReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "label", "true_params", "n", "estimator", "reps", "completed", "timed_out", "mean_error", "sd_error",
            "mean_time_s", "failures",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.label.clone(),
                r.true_params.clone(),
                r.n.to_string(),
                r.estimator.clone(),
                r.reps.to_string(),
                r.completed.to_string(),
                r.timed_out.to_string(),
                r.mean_error.map_or("--".into(), |v| format!("{v:?}")),
                r.sd_error.map_or("--".into(), |v| format!("{v:?}")),
                r.mean_time_s.map_or("--".into(), |v| format!("{v:?}")),
                r.failures.join("; "),
            ])?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Internal(e.to_string()))?)
            .map_err(|e| Error::Internal(e.to_string()))
    }

    /// Long-format error and time curves over `n`, one row per
    /// (label, estimator, n, metric).
    pub fn curves_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "estimator", "n", "metric", "value"])?;
        for r in &self.rows {
            for (metric, v) in [("mean_error", r.mean_error), ("mean_time_s", r.mean_time_s)] {
                if let Some(v) = v {
                    w.write_record([r.label.clone(), r.estimator.clone(), r.n.to_string(), metric.into(), format!("{v:?}")])?;
                }
            }
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Internal(e.to_string()))?)
            .map_err(|e| Error::Internal(e.to_string()))
    }

    /// Aligned text table with `(error, time)` cells.
    pub fn to_text(&self) -> String {
        let header = ["model", "n", "estimator", "error", "time_s", "done", "notes"];
        let body: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                let notes = match (r.timed_out, r.failures.len()) {
                    (true, _) => "time limit".to_string(),
                    (false, 0) => String::new(),
                    (false, f) => format!("{f} failed"),
                };
                [
                    r.label.clone(),
                    r.n.to_string(),
                    r.estimator.clone(),
                    cell_text(r.mean_error),
                    cell_text(r.mean_time_s),
                    format!("{}/{}", r.completed, r.reps),
                    notes,
                ]
            })
            .collect();
        let mut widths = header.map(|h| h.chars().count());
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[String]| {
            let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &header.map(String::from));
        line(&mut out, &widths.map(|w| "-".repeat(w)));
        for row in &body {
            line(&mut out, row);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Manifest {
        Manifest {
            name: "tiny".into(),
            seed: 3,
            time_limit_s: 60.0,
            cells: vec![Cell {
                label: "AR(1)".into(),
                model: TrueModel::Ar { phi: vec![0.5], sigma2: 0.5 },
                n: vec![60],
                estimators: vec![Estimator::Mle, Estimator::PleNaive, Estimator::PleSgd],
                reps: 3,
                settings: Settings::default(),
            }],
        }
    }

    #[test]
    fn presets_validate_and_round_trip() {
        for p in [Preset::Table1, Preset::Table2, Preset::Table3] {
            let m = p.manifest();
            m.validate().unwrap();
            assert_eq!(Manifest::parse(&m.to_toml().unwrap()).unwrap(), m);
        }
        assert_eq!(Preset::Table2.manifest().cells.len(), 12);
    }

    #[test]
    fn zero_repetitions_is_rejected() {
        let err = tiny().with_reps(0).validate().unwrap_err();
        assert_eq!(err.kind(), ErrorKind::Validation);
    }

    #[test]
    fn parses_hand_written_manifest() {
        let text = r#"
            seed = 1
            [[cell]]
            label = "VAR(1)"
            model = { var1 = { a = [[0.5, 0.1], [0.1, 0.5]], sigma = [[0.5, 0.0], [0.0, 0.5]] } }
            n = [100]
            estimators = ["mle", "ple-bipartition"]
            reps = 2
            settings = { lr0 = 0.5 }
        "#;
        let m = Manifest::parse(text).unwrap();
        assert_eq!(m.time_limit_s, DEFAULT_TIME_LIMIT_S);
        let truth = m.cells[0].model.truth().unwrap();
        assert_eq!(truth.spec.k(), 4);
        assert!((truth.theta[1] - 0.2).abs() < 1e-12);
        assert!(Manifest::parse("[[cell]]\nlabel = 1").is_err());
    }

    #[test]
    fn run_is_deterministic_and_complete() {
        let a = run(&tiny()).unwrap();
        let b = run(&tiny()).unwrap();
        assert_eq!(a.rows.len(), 3);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.mean_error, y.mean_error);
            assert_eq!(x.completed, 3);
            assert!(x.mean_error.unwrap() < 1.5);
        }
        assert!(a.to_text().contains("ple-sgd(eta=0.01,iters=10000)"));
        assert_eq!(a.curves_csv().unwrap().lines().count(), 1 + 6);
    }

    #[test]
    fn time_limit_marks_cell() {
        let mut m = tiny();
        m.time_limit_s = 1e-9;
        m.cells[0].estimators = vec![Estimator::PleNaive];
        let r = run(&m).unwrap();
        assert!(r.rows[0].timed_out);
        assert!(r.to_text().contains("--"));
        assert!(r.to_csv().unwrap().contains("--"));
    }

    #[test]
    fn mle_rejects_foreign_spec() {
        let spec = DependenceSpec::parse("0:0^2*1:0^1").unwrap();
        let s = TimeSeries::univariate((0..50).map(|i| (i as f64 * 0.7).sin()).collect()).unwrap();
        assert!(estimate(Estimator::Mle, &spec, &s, &Settings::default(), 0, None).is_err());
    }
}
