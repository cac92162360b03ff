//! Maximum conditional likelihood estimation.
//!
//! The observed ordering is scored against all orderings of the swappable
//! interior: `f(π|θ) ∝ exp(θᵀH(π∘x))`. Moments of `H` under `f(·|θ)` come
//! from an exchange Metropolis–Hastings chain over interior transpositions
//! (or from exhaustive enumeration when the interior is tiny), and Fisher
//! scoring climbs the conditional log-likelihood with them.

use std::io::Write;
use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::Instant;
use crate::error::{Error, Result};
use crate::numeric::{dot, log_sum_exp, norm2, CompensatedVec};
use crate::series::TimeSeries;
use crate::spec::DependenceSpec;
use crate::stats::{total_statistic, Permutation, SwapEvaluator};

/// Recompute `H` from the window cache every this many accepted swaps.
const RESYNC_EVERY: u64 = 1 << 16;

/// `θᵀδ`, the log acceptance ratio of a proposed swap with statistic change `δ`.
#[inline]
pub fn log_ratio_swap(theta: &[f64], delta: &[f64]) -> f64 {
    dot(theta, delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeConfig {
    /// Number of retained samples `L`.
    pub n_samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for ExchangeConfig {
    fn default() -> Self {
        Self { n_samples: 10_000, burn_in: 1_000, thin: 1, seed: 0 }
    }
}

impl ExchangeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.thin == 0 {
            return Err(Error::Config("n_samples and thin must be at least 1".into()));
        }
        Ok(())
    }
}

/// Retained statistics `H` (row-major, `len × k`) and chain diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeSamples {
    stats: Vec<f64>,
    k: usize,
    pub proposals: u64,
    pub accepted: u64,
}

impl ExchangeSamples {
    pub fn len(&self) -> usize {
        self.stats.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.stats[i * self.k..(i + 1) * self.k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.stats.chunks_exact(self.k)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            return 1.0;
        }
        self.accepted as f64 / self.proposals as f64
    }

    /// Sample mean and covariance (divisor `L`).
    pub fn moments(&self) -> (Vec<f64>, DMatrix<f64>) {
        let k = self.k;
        let l = self.len() as f64;
        let mut mean = CompensatedVec::zeros(k);
        for s in self.iter() {
            mean.add(s);
        }
        let mean: Vec<f64> = mean.values().into_iter().map(|v| v / l).collect();
        let mut cov = DMatrix::zeros(k, k);
        for s in self.iter() {
            for i in 0..k {
                let di = s[i] - mean[i];
                for j in 0..=i {
                    cov[(i, j)] += di * (s[j] - mean[j]);
                }
            }
        }
        for i in 0..k {
            for j in 0..=i {
                cov[(i, j)] /= l;
                cov[(j, i)] = cov[(i, j)];
            }
        }
        (mean, cov)
    }
}

fn interior_size(spec: &DependenceSpec, series: &TimeSeries) -> Result<usize> {
    let n = series.len();
    let d = spec.order();
    let m = n.saturating_sub(2 * d);
    if m < 2 {
        return Err(Error::InsufficientInterior { interior: m });
    }
    Ok(m)
}

/// Exchange chain that keeps its state between runs (warm starts).
pub struct ExchangeChain<'a> {
    eval: SwapEvaluator<'a>,
    rng: ChaCha8Rng,
    current: Vec<f64>,
    delta: Vec<f64>,
    lo: usize,
    m: usize,
    since_resync: u64,
}

impl<'a> ExchangeChain<'a> {
    pub fn new(spec: &'a DependenceSpec, series: &'a TimeSeries, seed: u64) -> Result<Self> {
        let m = interior_size(spec, series)?;
        let eval = SwapEvaluator::identity(spec, series)?;
        let current = eval.total();
        Ok(Self {
            delta: vec![0.0; spec.k()],
            current,
            lo: spec.order(),
            m,
            eval,
            rng: ChaCha8Rng::seed_from_u64(seed),
            since_resync: 0,
        })
    }

    /// `H` of the current state.
    pub fn current(&self) -> &[f64] {
        &self.current
    }

    pub fn order(&self) -> &Permutation {
        self.eval.order()
    }

    /// One Metropolis–Hastings step; returns whether the swap was accepted.
    #[inline]
    pub fn step(&mut self, theta: &[f64]) -> bool {
        let a = self.rng.random_range(0..self.m);
        let mut b = self.rng.random_range(0..self.m - 1);
        if b >= a {
            b += 1;
        }
        let (s1, s2) = if a < b { (self.lo + a, self.lo + b) } else { (self.lo + b, self.lo + a) };
        self.eval.delta_into(s1, s2, &mut self.delta);
        let log_rho = log_ratio_swap(theta, &self.delta);
        let u: f64 = self.rng.random();
        // u ≤ min(1, ρ); with ρ ≥ 1 the uniform draw is still consumed.
        if log_rho >= 0.0 || u <= log_rho.exp() {
            self.eval.apply_swap(s1, s2).expect("proposal stays in the interior");
            for (c, d) in self.current.iter_mut().zip(&self.delta) {
                *c += d;
            }
            self.since_resync += 1;
            if self.since_resync >= RESYNC_EVERY {
                self.current = self.eval.total();
                self.since_resync = 0;
            }
            true
        } else {
            false
        }
    }

    /// Runs `burn_in` steps, then retains `H` every `thin` steps until
    /// `n_samples` are collected. Checks `deadline` every few thousand steps.
    pub fn run(&mut self, theta: &[f64], config: &ExchangeConfig, deadline: Option<Instant>) -> Result<ExchangeSamples> {
        config.validate()?;
        if theta.len() != self.current.len() {
            return Err(Error::Shape(format!("θ has {} entries, spec has K = {}", theta.len(), self.current.len())));
        }
        let k = self.current.len();
        let mut out = ExchangeSamples { stats: Vec::with_capacity(config.n_samples * k), k, proposals: 0, accepted: 0 };
        let total_steps = config.burn_in as u64 + (config.n_samples as u64) * config.thin as u64;
        let mut step_no: u64 = 0;
        while step_no < total_steps {
            if step_no & 0xfff == 0 {
                if let Some(dl) = deadline {
                    if Instant::now() > dl {
                        return Err(Error::Timeout(0.0));
                    }
                }
            }
            out.proposals += 1;
            if self.step(theta) {
                out.accepted += 1;
            }
            step_no += 1;
            if step_no > config.burn_in as u64 && (step_no - config.burn_in as u64).is_multiple_of(config.thin as u64) {
                out.stats.extend_from_slice(&self.current);
            }
        }
        Ok(out)
    }
}

/// Algorithm-level entry point: a fresh chain from the identity ordering.
pub fn exchange_sample(
    spec: &DependenceSpec,
    series: &TimeSeries,
    theta: &[f64],
    config: &ExchangeConfig,
) -> Result<ExchangeSamples> {
    let mut chain = ExchangeChain::new(spec, series, config.seed)?;
    chain.run(theta, config, None)
}

/// `H` for every ordering of the interior, visited by Heap's algorithm
/// (one transposition per step).
pub fn enumerate_statistics(spec: &DependenceSpec, series: &TimeSeries, max_interior: usize) -> Result<Vec<Vec<f64>>> {
    let m = interior_size(spec, series)?;
    if m > max_interior {
        return Err(Error::BudgetExceeded { interior: m, max: max_interior });
    }
    let lo = spec.order();
    let mut eval = SwapEvaluator::identity(spec, series)?;
    let mut out = vec![eval.total()];
    let mut c = vec![0usize; m];
    let mut i = 1;
    while i < m {
        if c[i] < i {
            let j = if i % 2 == 0 { 0 } else { c[i] };
            let (a, b) = if j < i { (j, i) } else { (i, j) };
            eval.apply_swap(lo + a, lo + b)?;
            out.push(eval.total());
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(out)
}

/// Exact mean and covariance of `H` under `f(·|θ)` from enumerated statistics.
pub fn exact_moments(stats: &[Vec<f64>], theta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let k = theta.len();
    let logw: Vec<f64> = stats.iter().map(|h| dot(theta, h)).collect();
    let lse = log_sum_exp(&logw);
    let mut mean = CompensatedVec::zeros(k);
    for (h, lw) in stats.iter().zip(&logw) {
        mean.add_scaled((lw - lse).exp(), h);
    }
    let mean = mean.values();
    let mut cov = DMatrix::zeros(k, k);
    for (h, lw) in stats.iter().zip(&logw) {
        let w = (lw - lse).exp();
        for i in 0..k {
            for j in 0..k {
                cov[(i, j)] += w * (h[i] - mean[i]) * (h[j] - mean[j]);
            }
        }
    }
    (mean, cov)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig {
    pub max_iters: usize,
    /// Stop once `‖H_obs − μ̂‖ < grad_tol · (1 + ‖H_obs‖)`.
    pub grad_tol: f64,
    /// Initial step multiplier in `(0, 1]`; halved whenever the score norm grows.
    pub step_damping: f64,
    /// Diagonal added to `Ĝ`; `None` means `1e-8 · tr(Ĝ) / K`.
    pub ridge: Option<f64>,
    pub time_limit_s: Option<f64>,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self { max_iters: 30, grad_tol: 1e-3, step_damping: 1.0, ridge: None, time_limit_s: None }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::Config("grad_tol must be positive".into()));
        }
        if !(self.step_damping > 0.0 && self.step_damping <= 1.0) {
            return Err(Error::Config("step_damping must lie in (0, 1]".into()));
        }
        if let Some(r) = self.ridge {
            if !(r >= 0.0) {
                return Err(Error::Config("ridge must be non-negative".into()));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Where the moments of `H` under `f(·|θ)` come from.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentSource {
    Exchange(ExchangeConfig),
    /// Exhaustive enumeration; refuses interiors larger than `max_interior`.
    Exact { max_interior: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McleResult {
    pub theta_hat: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_acceptance_rate: f64,
    pub score_norm_trace: Vec<f64>,
    pub theta_trace: Vec<Vec<f64>>,
    pub acceptance_trace: Vec<f64>,
    pub wall_time: f64,
}

impl McleResult {
    /// Per-iteration CSV: `iter, theta_1..theta_K, score_norm, acceptance`.
    pub fn write_diagnostics<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let k = self.theta_hat.len();
        let mut header = vec!["iter".to_string()];
        header.extend((1..=k).map(|i| format!("theta_{i}")));
        header.push("score_norm".into());
        header.push("acceptance".into());
        w.write_record(&header)?;
        for (i, ((theta, s), a)) in
            self.theta_trace.iter().zip(&self.score_norm_trace).zip(&self.acceptance_trace).enumerate()
        {
            let mut row = vec![i.to_string()];
            row.extend(theta.iter().map(|v| format!("{v:?}")));
            row.push(format!("{s:?}"));
            row.push(format!("{a:?}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fisher scoring `θ ← θ + c·(Ĝ + ridge·I)⁻¹(H_obs − μ̂)` on the conditional
/// log-likelihood, with moments from `source`.
///
/// `theta_trace[i]`, `score_norm_trace[i]` and `acceptance_trace[i]` describe
/// the moments evaluated at the start of iteration `i`.
pub fn fisher_scoring_with(
    spec: &DependenceSpec,
    series: &TimeSeries,
    theta0: &[f64],
    source: &MomentSource,
    config: &ScoringConfig,
) -> Result<McleResult> {
    config.validate()?;
    let k = spec.k();
    if theta0.len() != k || theta0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Shape(format!("θ₀ must hold {k} finite values")));
    }
    let started = Instant::now();
    let deadline = config.time_limit_s.map(|s| started + Duration::from_secs_f64(s));
    let h_obs = total_statistic(spec, series)?;
    let tol = config.grad_tol * (1.0 + norm2(&h_obs));

    let enumerated = match source {
        MomentSource::Exact { max_interior } => Some(enumerate_statistics(spec, series, *max_interior)?),
        MomentSource::Exchange(c) => {
            c.validate()?;
            None
        }
    };
    let mut chain = match source {
        MomentSource::Exchange(c) => Some(ExchangeChain::new(spec, series, c.seed)?),
        MomentSource::Exact { .. } => None,
    };

    let mut theta = theta0.to_vec();
    let mut result = McleResult {
        theta_hat: theta.clone(),
        iterations: 0,
        converged: false,
        final_acceptance_rate: 1.0,
        score_norm_trace: Vec::new(),
        theta_trace: Vec::new(),
        acceptance_trace: Vec::new(),
        wall_time: 0.0,
    };
    let mut mult = config.step_damping;
    let mut prev_norm = f64::INFINITY;

    for iter in 0..config.max_iters {
        if deadline.is_some_and(|dl| Instant::now() > dl) {
            return Err(Error::Timeout(config.time_limit_s.unwrap_or_default()));
        }
        let (mean, cov, acc) = match (&enumerated, chain.as_mut(), source) {
            (Some(stats), _, _) => {
                let (m, c) = exact_moments(stats, &theta);
                (m, c, 1.0)
            }
            (None, Some(ch), MomentSource::Exchange(cfg)) => {
                let samples = ch
                    .run(&theta, cfg, deadline)
                    .map_err(|e| match e {
                        Error::Timeout(_) => Error::Timeout(config.time_limit_s.unwrap_or_default()),
                        other => other,
                    })?;
                let (m, c) = samples.moments();
                (m, c, samples.acceptance_rate())
            }
            _ => unreachable!("moment source and state agree"),
        };
        let score: Vec<f64> = h_obs.iter().zip(&mean).map(|(o, m)| o - m).collect();
        let sn = norm2(&score);
        result.theta_trace.push(theta.clone());
        result.score_norm_trace.push(sn);
        result.acceptance_trace.push(acc);
        result.final_acceptance_rate = acc;
        result.iterations = iter + 1;
        if sn < tol {
            result.converged = true;
            break;
        }
        if sn > prev_norm {
            mult = (mult * 0.5).max(1.0 / 64.0);
        }
        prev_norm = sn;

        let ridge = config.ridge.unwrap_or(1e-8 * cov.trace() / k as f64);
        let g = &cov + DMatrix::identity(k, k) * ridge;
        let step = g
            .clone()
            .cholesky()
            .map(|c| c.solve(&DVector::from_column_slice(&score)))
            .ok_or_else(|| {
                Error::IllConditioned(format!(
                    "Ĝ + {ridge:e}·I is not positive definite at θ = {theta:?} (diagonal {:?})",
                    g.diagonal().as_slice()
                ))
            })?;
        for (t, s) in theta.iter_mut().zip(step.iter()) {
            *t += mult * s;
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::IllConditioned("Fisher scoring produced a non-finite θ".into()));
        }
    }
    result.theta_hat = theta;
    result.wall_time = started.elapsed().as_secs_f64();
    Ok(result)
}

/// Fisher scoring with exchange-chain moments.
pub fn fisher_scoring(
    spec: &DependenceSpec,
    series: &TimeSeries,
    theta0: &[f64],
    exchange: &ExchangeConfig,
    scoring: &ScoringConfig,
) -> Result<McleResult> {
    fisher_scoring_with(spec, series, theta0, &MomentSource::Exchange(exchange.clone()), scoring)
}
