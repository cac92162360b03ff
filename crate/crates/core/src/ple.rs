//! Besag pseudo-likelihood estimation.
//!
//! Each pair of interior positions contributes the probability that the
//! observed ordering beats its transposition, `σ(θᵀx)` with
//! `x = H(id) − H(swapped)`. Maximizing the product is an intercept-free
//! logistic regression with constant response 1.

use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clock::Instant;
use crate::error::{Error, Result};
use crate::numeric::{dot, ln_pairs, n_pairs, norm2, sigmoid, softplus, CompensatedSum, CompensatedVec};
use crate::series::TimeSeries;
use crate::spec::DependenceSpec;
use crate::stats::SwapEvaluator;

pub const SCHEMA_VERSION: u32 = 1;

/// Feature vector of one pair of interior positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStatistic {
    pub s1: usize,
    pub s2: usize,
    pub x: Vec<f64>,
}

/// `x = H(identity) − H(s1 ↔ s2)`, the negated swap delta.
pub fn pair_statistic(spec: &DependenceSpec, series: &TimeSeries, s1: usize, s2: usize) -> Result<PairStatistic> {
    let mut eval = SwapEvaluator::identity(spec, series)?;
    let mut x = eval.delta(s1, s2)?;
    x.iter_mut().for_each(|v| *v = -*v);
    Ok(PairStatistic { s1, s2, x })
}

/// `Σ −softplus(−θᵀx)` over the pairs.
pub fn log_pl<'p>(theta: &[f64], pairs: impl IntoIterator<Item = &'p PairStatistic>) -> f64 {
    let mut acc = CompensatedSum::new();
    for p in pairs {
        acc.add(-softplus(-dot(theta, &p.x)));
    }
    acc.value()
}

/// Gradient of [`log_pl`]: `Σ σ(−θᵀx) x`.
pub fn log_pl_gradient<'p>(theta: &[f64], pairs: impl IntoIterator<Item = &'p PairStatistic>) -> Vec<f64> {
    let mut acc = CompensatedVec::zeros(theta.len());
    for p in pairs {
        acc.add_scaled(sigmoid(-dot(theta, &p.x)), &p.x);
    }
    acc.values()
}

/// `(AIC, PIC) = (−2ℓ + 2K, −2ℓ + K ln C(n−2d, 2))`.
pub fn aic_pic(log_pl: f64, k: usize, n: usize, d: usize) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    let m = n.saturating_sub(2 * d);
    if m < 2 {
        return Err(Error::InsufficientInterior { interior: m });
    }
    let k = k as f64;
    Ok((-2.0 * log_pl + 2.0 * k, -2.0 * log_pl + k * ln_pairs(m)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    pub max_epochs: usize,
    /// Learning rate in units of `4 / mean‖x‖²`, the inverse curvature bound
    /// of the mean objective.
    pub lr0: f64,
    /// `lr_t = lr0 / (1 + decay·t)`.
    pub decay: f64,
    /// Stop once the step is below `tol · (1 + ‖θ‖)`.
    pub tol: f64,
    /// `‖θ‖` beyond this is treated as perfect separation.
    pub theta_cap: f64,
    /// Pair features are kept in memory when `pairs · K` is at most this.
    pub materialize_limit: usize,
    pub time_limit_s: Option<f64>,
}

impl Default for GdConfig {
    fn default() -> Self {
        Self {
            max_epochs: 500,
            lr0: 1.0,
            decay: 0.01,
            tol: 1e-6,
            theta_cap: 1e3,
            materialize_limit: 1 << 23,
            time_limit_s: None,
        }
    }
}

impl GdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > 0.0) || !(self.decay >= 0.0) || !(self.tol > 0.0) || !(self.theta_cap > 0.0) {
            return Err(Error::Config("need lr0 > 0, decay ≥ 0, tol > 0 and theta_cap > 0".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub eta: f64,
    pub n_iters: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { eta: 0.01, n_iters: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PleResult {
    pub theta_hat: Vec<f64>,
    /// Pseudo-log-likelihood at `theta_hat` over `log_pl_pairs` pairs.
    pub log_pl: f64,
    pub log_pl_pairs: u64,
    /// Pair evaluations that drove the fit (pairs per epoch for batch fits,
    /// iterations for SGD).
    pub n_pairs_used: u64,
    pub wall_time: f64,
    pub converged: bool,
    pub separated: bool,
    pub epochs: usize,
    pub objective_trace: Vec<f64>,
}

/// JSON record of a fit, with information criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PleReport {
    pub schema_version: u32,
    pub theta: Vec<f64>,
    pub log_pl: f64,
    pub aic: f64,
    pub pic: f64,
    pub n_pairs_used: u64,
    pub wall_time_s: f64,
    pub converged: bool,
    pub separated: bool,
}

impl PleResult {
    pub fn report(&self, n: usize, d: usize) -> Result<PleReport> {
        let (aic, pic) = aic_pic(self.log_pl, self.theta_hat.len(), n, d)?;
        Ok(PleReport {
            schema_version: SCHEMA_VERSION,
            theta: self.theta_hat.clone(),
            log_pl: self.log_pl,
            aic,
            pic,
            n_pairs_used: self.n_pairs_used,
            wall_time_s: self.wall_time,
            converged: self.converged,
            separated: self.separated,
        })
    }
}

fn interior(spec: &DependenceSpec, series: &TimeSeries) -> Result<(usize, usize)> {
    interior_with_margin(spec, series, spec.order())
}

fn interior_with_margin(spec: &DependenceSpec, series: &TimeSeries, d: usize) -> Result<(usize, usize)> {
    if series.dim() != spec.dim() {
        return Err(Error::Shape(format!("series has {} columns, spec expects {}", series.dim(), spec.dim())));
    }
    if d < spec.order() {
        return Err(Error::Config(format!("margin {d} is below the spec order {}", spec.order())));
    }
    let m = series.len().saturating_sub(2 * d);
    if m < 2 {
        return Err(Error::InsufficientInterior { interior: m });
    }
    Ok((d, m))
}

/// Objective sum, gradient sum and `Σ‖x‖²` over a pair set.
struct Eval {
    obj: f64,
    grad: Vec<f64>,
    sq: f64,
}

#[derive(Default)]
struct Acc {
    obj: CompensatedSum,
    grad: Option<CompensatedVec>,
    sq: CompensatedSum,
}

impl Acc {
    fn new(k: usize) -> Self {
        Self { grad: Some(CompensatedVec::zeros(k)), ..Default::default() }
    }

    #[inline]
    fn push(&mut self, theta: &[f64], x: &[f64]) {
        let z = dot(theta, x);
        self.obj.add(-softplus(-z));
        self.grad.as_mut().expect("initialized").add_scaled(sigmoid(-z), x);
        self.sq.add(dot(x, x));
    }

    fn merge(mut self, other: &Acc) -> Self {
        self.obj.add(other.obj.value());
        self.sq.add(other.sq.value());
        self.grad.as_mut().expect("initialized").add(&other.grad.as_ref().expect("initialized").values());
        self
    }

    fn finish(self) -> Eval {
        Eval { obj: self.obj.value(), grad: self.grad.expect("initialized").values(), sq: self.sq.value() }
    }
}

/// Where batch gradient ascent reads its pair features from.
enum PairSet<'a> {
    /// Row-major features, `k` per pair.
    Stored { xs: Vec<f64>, k: usize },
    /// All interior pairs, recomputed every epoch in fixed `s1` blocks.
    Streamed { spec: &'a DependenceSpec, series: &'a TimeSeries, d: usize, m: usize },
}

const STREAM_BLOCK_ROWS: usize = 32;

impl PairSet<'_> {
    fn len(&self) -> u64 {
        match self {
            Self::Stored { xs, k } => (xs.len() / k) as u64,
            Self::Streamed { m, .. } => n_pairs(*m),
        }
    }

    fn eval(&self, theta: &[f64]) -> Result<Eval> {
        let k = theta.len();
        match self {
            Self::Stored { xs, k } => {
                let mut acc = Acc::new(*k);
                for x in xs.chunks_exact(*k) {
                    acc.push(theta, x);
                }
                Ok(acc.finish())
            }
            Self::Streamed { spec, series, d, m } => {
                let blocks: Vec<usize> = (0..m.div_ceil(STREAM_BLOCK_ROWS)).collect();
                // Blocks are reduced in index order so the result does not
                // depend on the thread count.
                let partial: Vec<Result<Acc>> = blocks
                    .par_iter()
                    .map(|&b| {
                        let mut eval = SwapEvaluator::identity(spec, series)?;
                        let mut acc = Acc::new(k);
                        let mut buf = vec![0.0; k];
                        let lo = b * STREAM_BLOCK_ROWS;
                        let hi = (lo + STREAM_BLOCK_ROWS).min(*m);
                        for a in lo..hi {
                            for c in a + 1..*m {
                                eval.delta_into(d + a, d + c, &mut buf);
                                buf.iter_mut().for_each(|v| *v = -*v);
                                acc.push(theta, &buf);
                            }
                        }
                        Ok(acc)
                    })
                    .collect();
                let mut total = Acc::new(k);
                for p in partial {
                    total = total.merge(&p?);
                }
                Ok(total.finish())
            }
        }
    }
}

fn store_pairs(spec: &DependenceSpec, series: &TimeSeries, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    let k = spec.k();
    let mut eval = SwapEvaluator::identity(spec, series)?;
    let mut xs = vec![0.0; pairs.len() * k];
    for (&(s1, s2), out) in pairs.iter().zip(xs.chunks_exact_mut(k)) {
        eval.delta_into(s1, s2, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(xs)
}

fn gradient_ascent(set: &PairSet<'_>, k: usize, config: &GdConfig, started: Instant) -> Result<PleResult> {
    config.validate()?;
    let deadline = config.time_limit_s.map(|s| started + Duration::from_secs_f64(s));
    let count = set.len();
    let mut theta = vec![0.0; k];
    let mut cur = set.eval(&theta)?;
    let mean_sq = cur.sq / count as f64;
    let base = if mean_sq > 0.0 { 4.0 / mean_sq } else { 0.0 };
    let mut result = PleResult {
        theta_hat: theta.clone(),
        log_pl: cur.obj,
        log_pl_pairs: count,
        n_pairs_used: count,
        wall_time: 0.0,
        converged: false,
        separated: false,
        epochs: 0,
        objective_trace: vec![cur.obj],
    };
    let mut shrink = 1.0;
    for epoch in 0..config.max_epochs {
        if deadline.is_some_and(|dl| Instant::now() > dl) {
            return Err(Error::Timeout(config.time_limit_s.unwrap_or_default()));
        }
        result.epochs = epoch + 1;
        let lr = config.lr0 * base * shrink / (1.0 + config.decay * epoch as f64);
        let step: Vec<f64> = cur.grad.iter().map(|g| lr * g / count as f64).collect();
        if norm2(&step) < config.tol * (1.0 + norm2(&theta)) {
            result.converged = true;
            break;
        }
        let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + s).collect();
        let next = set.eval(&cand)?;
        if next.obj < cur.obj {
            shrink *= 0.5;
            continue;
        }
        theta = cand;
        cur = next;
        result.objective_trace.push(cur.obj);
        if norm2(&theta) > config.theta_cap {
            result.separated = true;
            break;
        }
    }
    result.theta_hat = theta;
    result.log_pl = cur.obj;
    result.wall_time = started.elapsed().as_secs_f64();
    Ok(result)
}

/// Full-batch gradient ascent over all `C(n−2d, 2)` interior pairs from `θ = 0`.
pub fn fit_naive(spec: &DependenceSpec, series: &TimeSeries, config: &GdConfig) -> Result<PleResult> {
    fit_naive_with_margin(spec, series, spec.order(), config)
}

/// [`fit_naive`] over pairs inside `margin ≤ s < n − margin`. Specs of
/// different order fitted with a common margin share one pair set, so their
/// pseudo-likelihoods are directly comparable.
pub fn fit_naive_with_margin(
    spec: &DependenceSpec,
    series: &TimeSeries,
    margin: usize,
    config: &GdConfig,
) -> Result<PleResult> {
    config.validate()?;
    let started = Instant::now();
    let (d, m) = interior_with_margin(spec, series, margin)?;
    let k = spec.k();
    let count = n_pairs(m);
    let set = if count.saturating_mul(k as u64) <= config.materialize_limit as u64 {
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |c| (d + a, d + c))).collect();
        PairSet::Stored { xs: store_pairs(spec, series, &pairs)?, k }
    } else {
        PairSet::Streamed { spec, series, d, m }
    };
    gradient_ascent(&set, k, config, started)
}

/// Interior positions split into `⌊(n−2d)/2⌋` disjoint random pairs.
pub fn random_matching(d: usize, m: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut idx: Vec<usize> = (d..d + m).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.chunks_exact(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect()
}

/// Gradient ascent restricted to one random perfect matching of the interior.
pub fn fit_bipartition(spec: &DependenceSpec, series: &TimeSeries, seed: u64, config: &GdConfig) -> Result<PleResult> {
    config.validate()?;
    let started = Instant::now();
    let (d, m) = interior(spec, series)?;
    let pairs = random_matching(d, m, seed);
    let set = PairSet::Stored { xs: store_pairs(spec, series, &pairs)?, k: spec.k() };
    gradient_ascent(&set, spec.k(), config, started)
}

/// Pair counts above this make SGD report `log_pl` on a random matching
/// instead of all pairs.
const SGD_FULL_EVAL_LIMIT: u64 = 20_000_000;

/// Single-pair stochastic gradient ascent, `θ ← θ + η σ(−θᵀx) x`, for a
/// fixed number of uniformly drawn interior pairs.
///
/// `wall_time` covers the updates only; the final `log_pl` evaluation is
/// excluded.
pub fn fit_online_sgd(spec: &DependenceSpec, series: &TimeSeries, config: &SgdConfig) -> Result<PleResult> {
    if !(config.eta > 0.0) {
        return Err(Error::Config("eta must be positive".into()));
    }
    let started = Instant::now();
    let (d, m) = interior(spec, series)?;
    let k = spec.k();
    let mut eval = SwapEvaluator::identity(spec, series)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut theta = vec![0.0; k];
    let mut x = vec![0.0; k];
    for _ in 0..config.n_iters {
        let a = rng.random_range(0..m);
        let mut b = rng.random_range(0..m - 1);
        if b >= a {
            b += 1;
        }
        let (s1, s2) = (d + a.min(b), d + a.max(b));
        eval.delta_into(s1, s2, &mut x);
        x.iter_mut().for_each(|v| *v = -*v);
        let w = config.eta * sigmoid(-dot(&theta, &x));
        for (t, xi) in theta.iter_mut().zip(&x) {
            *t += w * xi;
        }
    }
    let wall_time = started.elapsed().as_secs_f64();
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::IllConditioned("online SGD diverged".into()));
    }
    let total = n_pairs(m);
    let set = if total <= SGD_FULL_EVAL_LIMIT {
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |c| (d + a, d + c))).collect();
        PairSet::Stored { xs: store_pairs(spec, series, &pairs)?, k }
    } else {
        PairSet::Stored { xs: store_pairs(spec, series, &random_matching(d, m, config.seed))?, k }
    };
    let final_eval = set.eval(&theta)?;
    Ok(PleResult {
        theta_hat: theta,
        log_pl: final_eval.obj,
        log_pl_pairs: set.len(),
        n_pairs_used: config.n_iters as u64,
        wall_time,
        converged: true,
        separated: false,
        epochs: 0,
        objective_trace: Vec::new(),
    })
}

/// All interior pair statistics, for small problems and tests.
pub fn all_pair_statistics(spec: &DependenceSpec, series: &TimeSeries) -> Result<Vec<PairStatistic>> {
    let (d, m) = interior(spec, series)?;
    let k = spec.k();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |c| (d + a, d + c))).collect();
    let xs = store_pairs(spec, series, &pairs)?;
    Ok(pairs.iter().zip(xs.chunks_exact(k)).map(|(&(s1, s2), x)| PairStatistic { s1, s2, x: x.to_vec() }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{simulate_ar, ClassicalArParams};
    use crate::stats::delta_statistic_swap;
    use crate::stats::Permutation;

    fn ar1() -> DependenceSpec {
        DependenceSpec::ar(1).unwrap()
    }

    fn sim(phi: f64, n: usize, seed: u64) -> TimeSeries {
        simulate_ar(&ClassicalArParams::new(vec![phi], 0.5).unwrap(), n, 0, seed).unwrap()
    }

    #[test]
    fn pair_statistic_examples() {
        let series = TimeSeries::univariate(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(pair_statistic(&ar1(), &series, 1, 2).unwrap().x, vec![3.0]);
        let flat = TimeSeries::univariate(vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(pair_statistic(&ar1(), &flat, 1, 2).unwrap().x, vec![0.0]);
        assert!(pair_statistic(&ar1(), &series, 0, 2).is_err());
    }

    #[test]
    fn pair_statistic_is_antisymmetric_and_negated_delta() {
        let series = sim(0.5, 40, 1);
        let spec = ar1();
        for (s1, s2) in [(1, 2), (4, 30), (7, 9)] {
            let x = pair_statistic(&spec, &series, s1, s2).unwrap().x;
            let delta = delta_statistic_swap(&spec, &series, &Permutation::identity(40, 1), s1, s2).unwrap();
            assert_eq!(x[0], -delta[0]);
            let mut order: Vec<usize> = (0..40).collect();
            order.swap(s1, s2);
            let swapped = series.reordered(&order).unwrap();
            let back = pair_statistic(&spec, &swapped, s1, s2).unwrap().x;
            assert!((back[0] + x[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn log_pl_at_zero() {
        let series = sim(0.5, 60, 2);
        let pairs = all_pair_statistics(&ar1(), &series).unwrap();
        assert_eq!(pairs.len(), 58 * 57 / 2);
        let want = pairs.len() as f64 * 0.5f64.ln();
        assert!((log_pl(&[0.0], &pairs) - want).abs() < 1e-9 * want.abs());
    }

    #[test]
    fn single_pair_log_pl() {
        let pair = PairStatistic { s1: 1, s2: 2, x: vec![2.5] };
        for (theta, want) in [(1.0, -0.078_889_734_292_549_63), (-4.0, -10.000045398899218), (40.0, -3.720075976020836e-44)] {
            let got = log_pl(&[theta], [&pair]);
            assert!((got - want).abs() <= 1e-12 * want.abs(), "{theta}: {got} vs {want}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let series = sim(0.5, 40, 3);
        let spec = DependenceSpec::ar(2).unwrap();
        let pairs = all_pair_statistics(&spec, &series).unwrap();
        let theta = [0.4, -0.3];
        let g = log_pl_gradient(&theta, &pairs);
        for i in 0..2 {
            let h = 1e-5;
            let mut up = theta;
            let mut dn = theta;
            up[i] += h;
            dn[i] -= h;
            let fd = (log_pl(&up, &pairs) - log_pl(&dn, &pairs)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6 * g[i].abs().max(1.0), "{fd} vs {}", g[i]);
        }
    }

    #[test]
    fn naive_objective_never_decreases() {
        let series = sim(0.5, 300, 4);
        let r = fit_naive(&ar1(), &series, &GdConfig::default()).unwrap();
        assert!(r.converged);
        assert!(r.objective_trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.log_pl <= 0.0);
        assert!((r.theta_hat[0] - 1.0).abs() < 0.5);
    }

    #[test]
    fn naive_stationary_point() {
        let series = sim(0.5, 200, 5);
        let r = fit_naive(&ar1(), &series, &GdConfig { tol: 1e-10, ..Default::default() }).unwrap();
        let pairs = all_pair_statistics(&ar1(), &series).unwrap();
        let g = log_pl_gradient(&r.theta_hat, &pairs);
        assert!(g[0].abs() / pairs.len() as f64 <= 1e-8);
    }

    #[test]
    fn streamed_matches_stored() {
        let series = sim(0.5, 150, 6);
        let stored = fit_naive(&ar1(), &series, &GdConfig::default()).unwrap();
        let streamed = fit_naive(&ar1(), &series, &GdConfig { materialize_limit: 0, ..Default::default() }).unwrap();
        assert!((stored.theta_hat[0] - streamed.theta_hat[0]).abs() < 1e-10);
        assert!((stored.log_pl - streamed.log_pl).abs() < 1e-8);
    }

    #[test]
    fn bipartition_pair_count() {
        let series = sim(0.5, 101, 7);
        let r = fit_bipartition(&ar1(), &series, 1, &GdConfig::default()).unwrap();
        assert_eq!(r.n_pairs_used, 49);
        let matching = random_matching(1, 99, 3);
        assert_eq!(matching.len(), 49);
        let mut used: Vec<usize> = matching.iter().flat_map(|&(a, b)| [a, b]).collect();
        used.sort_unstable();
        used.dedup();
        assert_eq!(used.len(), 98);
        assert_ne!(random_matching(1, 99, 3), random_matching(1, 99, 4));
    }

    #[test]
    fn constant_series_leaves_sgd_at_zero() {
        let series = TimeSeries::univariate(vec![1.5; 50]).unwrap();
        let r = fit_online_sgd(&ar1(), &series, &SgdConfig { eta: 0.1, n_iters: 1000, seed: 1 }).unwrap();
        assert_eq!(r.theta_hat, vec![0.0]);
    }

    #[test]
    fn sgd_moves_toward_truth() {
        let series = sim(0.5, 1000, 8);
        let r = fit_online_sgd(&ar1(), &series, &SgdConfig { eta: 0.01, n_iters: 10_000, seed: 2 }).unwrap();
        assert!((r.theta_hat[0] - 1.0).abs() < 0.4, "{:?}", r.theta_hat);
        assert_eq!(r.log_pl_pairs, n_pairs(998));
    }

    #[test]
    fn information_criteria() {
        let (aic, pic) = aic_pic(-343262.87, 1, 1000, 1).unwrap();
        assert!((aic - 686527.74).abs() < 1e-6);
        assert!((pic - (686525.74 + (998.0f64 * 997.0 / 2.0).ln())).abs() < 1e-6);
        assert!(aic_pic(-1.0, 0, 100, 1).is_err());
        let (a1, _) = aic_pic(-10.0, 3, 100, 1).unwrap();
        let (a2, _) = aic_pic(-10.0, 6, 100, 1).unwrap();
        assert!((a2 - a1 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn report_serializes() {
        let series = sim(0.5, 100, 9);
        let r = fit_naive(&ar1(), &series, &GdConfig::default()).unwrap();
        let json = serde_json::to_value(r.report(100, 1).unwrap()).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert!(json["aic"].as_f64().unwrap() > 0.0);
    }
}
