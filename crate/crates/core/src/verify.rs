//! Self-check suite: every invariant the library promises, measured against
//! a tolerance, as a machine-readable report.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::Instant;
use crate::error::Result;
use crate::gaussian::{
    ar1_fisher_info, ar1_to_mininfo, ar2_to_mininfo, ar_from_partial_autocorrelations, ard_to_mininfo,
    construct_e_kernel, divergence_rate, mininfo_to_ar1, mininfo_to_ar2, mininfo_to_ard, mininfo_to_var1_with,
    simulate_ar, var1_to_mininfo, ClassicalArParams, ClassicalVarParams, GaussianKernel, MinInfoArParams,
    RiccatiOptions,
};
use crate::mcle::{
    enumerate_statistics, exact_moments, exchange_sample, fisher_scoring_with, log_ratio_swap, ExchangeConfig,
    MomentSource, ScoringConfig,
};
use crate::numeric::{log_sum_exp, n_pairs};
use crate::oracle::{ar1_fisher_info_numeric, enumerate_orderings, exact_cle, EnumerationBudget};
use crate::ple::{all_pair_statistics, fit_naive, log_pl, log_pl_gradient, GdConfig};
use crate::series::TimeSeries;
use crate::spec::{DependenceSpec, Factor, MonomialTerm};
use crate::stats::{delta_statistic_swap, total_statistic, total_statistic_ordered, Permutation, SwapEvaluator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Riccati tolerance used by the VAR(1) round-trip checks.
    pub riccati_tol: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { riccati_tol: RiccatiOptions::default().tol, seed: 20240601 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed discrepancy.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Measured value, or an error message when the computation itself failed.
type Measure = std::result::Result<(f64, String), String>;

struct Suite {
    checks: Vec<CheckResult>,
}

impl Suite {
    /// Passes when the measured value is at most `tolerance`.
    fn check(&mut self, name: &str, tolerance: f64, f: impl FnOnce() -> Measure) {
        let t = Instant::now();
        let (passed, measured, detail) = match f() {
            Ok((m, detail)) => (m <= tolerance, m, detail),
            Err(e) => (false, f64::NAN, e),
        };
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            measured,
            tolerance,
            detail,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_ar(rng: &mut ChaCha8Rng, d: usize) -> ClassicalArParams {
    let pacf: Vec<f64> = (0..d).map(|_| rng.random_range(-0.9..0.9)).collect();
    let phi = ar_from_partial_autocorrelations(&pacf).expect("pacf inside (-1, 1)");
    ClassicalArParams::new(phi, rng.random_range(0.1..3.0)).expect("stationary by construction")
}

fn random_var1(rng: &mut ChaCha8Rng) -> ClassicalVarParams {
    let p = rng.random_range(1..=3);
    loop {
        let a = DMatrix::from_fn(p, p, |_, _| rng.random_range(-0.6..0.6));
        let l = DMatrix::from_fn(p, p, |i, j| if j <= i { rng.random_range(-1.0..1.0) } else { 0.0 });
        let sigma = &l * l.transpose() + DMatrix::identity(p, p) * 0.2;
        if let Ok(params) = ClassicalVarParams::new(vec![a], sigma) {
            return params;
        }
    }
}

fn random_series(rng: &mut ChaCha8Rng, n: usize, p: usize) -> TimeSeries {
    TimeSeries::real((0..n * p).map(|_| rng.random_range(-2.0..2.0)).collect(), p).expect("finite data")
}

fn random_spec(rng: &mut ChaCha8Rng, d: usize, p: usize) -> DependenceSpec {
    let k = rng.random_range(1..=4);
    let terms = (0..k)
        .map(|_| {
            let mut factors = vec![Factor::new(0, rng.random_range(0..p), rng.random_range(1..=2))];
            for _ in 0..rng.random_range(1..=2) {
                factors.push(Factor::new(rng.random_range(0..=d), rng.random_range(0..p), rng.random_range(1..=2)));
            }
            MonomialTerm::new(factors).expect("non-empty factor list")
        })
        .collect();
    DependenceSpec::new(d, p, terms).expect("terms within order and dimension")
}

fn ar1_sim(n: usize, seed: u64) -> TimeSeries {
    simulate_ar(&ClassicalArParams::new(vec![0.5], 0.5).expect("valid"), n, 0, seed).expect("valid length")
}

/// Runs every check. Failing checks are reported, never raised.
pub fn run_all(config: &VerifyConfig) -> Result<VerifyReport> {
    let started = Instant::now();
    let mut suite = Suite { checks: Vec::new() };
    let seed = config.seed;
    let riccati = RiccatiOptions { tol: config.riccati_tol, ..Default::default() };

    transform_checks(&mut suite, seed, &riccati);
    geometry_checks(&mut suite, seed);
    statistic_checks(&mut suite, seed);
    mcle_checks(&mut suite, seed);
    ple_checks(&mut suite, seed);

    Ok(VerifyReport {
        schema_version: crate::ple::SCHEMA_VERSION,
        config: config.clone(),
        checks: suite.checks,
        seconds: started.elapsed().as_secs_f64(),
    })
}

fn transform_checks(suite: &mut Suite, seed: u64, riccati: &RiccatiOptions) {
    suite.check("transform.ar1_table", 1e-12, || {
        let m = ar1_to_mininfo(&ClassicalArParams::new(vec![0.5], 0.5).map_err(s)?).map_err(s)?;
        Ok(((m.theta()[0] - 1.0).abs().max((m.tau2() - 2.0 / 3.0).abs()), format!("θ = {:?}", m.theta())))
    });
    suite.check("transform.ar2_table", 1e-12, || {
        let m = ar2_to_mininfo(&ClassicalArParams::new(vec![0.5, 0.3], 0.5).map_err(s)?).map_err(s)?;
        Ok((max_abs_diff(m.theta(), &[0.7, 0.6]), format!("θ = {:?}", m.theta())))
    });
    suite.check("transform.ard_table", 1e-12, || {
        let m = ard_to_mininfo(&ClassicalArParams::new(vec![0.5, 0.3, 0.1], 0.5).map_err(s)?).map_err(s)?;
        Ok((max_abs_diff(m.theta(), &[0.64, 0.5, 0.2]), format!("θ = {:?}", m.theta())))
    });
    suite.check("transform.var1_table", 1e-12, || {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.5]);
        let c = ClassicalVarParams::new(vec![a], DMatrix::identity(2, 2) * 0.5).map_err(s)?;
        let m = var1_to_mininfo(&c).map_err(s)?;
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]);
        Ok(((m.theta() - want).abs().max(), format!("Θ = {:?}", m.theta().as_slice())))
    });
    suite.check("transform.ard_reduces_to_closed_forms", 1e-12, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for d in [1, 2] {
            for _ in 0..50 {
                let c = random_ar(&mut rng, d);
                let closed = if d == 1 { ar1_to_mininfo(&c) } else { ar2_to_mininfo(&c) }.map_err(s)?;
                let general = ard_to_mininfo(&c).map_err(s)?;
                worst = worst
                    .max(max_abs_diff(closed.theta(), general.theta()) / (1.0 + closed.theta()[0].abs()))
                    .max((closed.tau2() - general.tau2()).abs() / closed.tau2());
            }
        }
        Ok((worst, "relative, 100 draws".into()))
    });
    suite.check("roundtrip.ar1", 1e-10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let c = random_ar(&mut rng, 1);
            let back = mininfo_to_ar1(&ar1_to_mininfo(&c).map_err(s)?).map_err(s)?;
            worst = worst.max(max_abs_diff(back.phi(), c.phi())).max((back.sigma2() - c.sigma2()).abs());
        }
        Ok((worst, "100 draws".into()))
    });
    suite.check("roundtrip.ar2", 1e-10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 2);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let c = random_ar(&mut rng, 2);
            let back = mininfo_to_ar2(&ar2_to_mininfo(&c).map_err(s)?).map_err(s)?;
            worst = worst.max(max_abs_diff(back.phi(), c.phi())).max((back.sigma2() - c.sigma2()).abs());
        }
        Ok((worst, "100 draws".into()))
    });
    suite.check("roundtrip.ar3_newton", 1e-8, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 3);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let c = random_ar(&mut rng, 3);
            let m = ard_to_mininfo(&c).map_err(s)?;
            let again = ard_to_mininfo(&mininfo_to_ard(&m).map_err(s)?).map_err(s)?;
            worst = worst.max(max_abs_diff(again.theta(), m.theta())).max((again.tau2() - m.tau2()).abs());
        }
        Ok((worst, "forward residual, 50 draws".into()))
    });
    suite.check("roundtrip.var1", 1e-10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 4);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let c = random_var1(&mut rng);
            let back = mininfo_to_var1_with(&var1_to_mininfo(&c).map_err(s)?, riccati).map_err(s)?;
            worst = worst
                .max((&back.a()[0] - &c.a()[0]).abs().max())
                .max((back.sigma() - c.sigma()).abs().max());
        }
        Ok((worst, format!("100 draws, Riccati tol {:e}", riccati.tol)))
    });
    suite.check("riccati.residual", 1e-8, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 5);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let m = var1_to_mininfo(&random_var1(&mut rng)).map_err(s)?;
            let c = mininfo_to_var1_with(&m, riccati).map_err(s)?;
            let a = &c.a()[0];
            let b = m.b();
            let lyap = (b - a * b * a.transpose() - c.sigma()).norm() / b.norm();
            let sigma_inv = c.sigma().clone().try_inverse().ok_or("Σ not invertible")?;
            let theta = (a.transpose() * sigma_inv - m.theta()).norm() / (1.0 + m.theta().norm());
            worst = worst.max(lyap).max(theta);
        }
        Ok((worst, "‖B − ABAᵀ − Σ‖/‖B‖ and Θ = AᵀΣ⁻¹".into()))
    });
}

fn geometry_checks(suite: &mut Suite, seed: u64) {
    let grid: Vec<(f64, f64)> = [-2.0, -1.0, 0.0, 1.0, 2.0]
        .into_iter()
        .flat_map(|t| [0.25, 2.0 / 3.0, 1.0, 4.0].into_iter().map(move |v| (t, v)))
        .collect();
    suite.check("fisher.closed_form_vs_quadrature", 1e-6, || {
        let mut worst: f64 = 0.0;
        for &(t, v) in &grid {
            let a = ar1_fisher_info(t, v).map_err(s)?;
            let b = ar1_fisher_info_numeric(t, v).map_err(s)?;
            worst = worst.max((a - b).abs().max());
        }
        Ok((worst, format!("{} grid points", grid.len())))
    });
    suite.check("fisher.orthogonality", 1e-6, || {
        let mut worst: f64 = 0.0;
        for &(t, v) in &grid {
            let a = ar1_fisher_info(t, v).map_err(s)?;
            let b = ar1_fisher_info_numeric(t, v).map_err(s)?;
            worst = worst.max(a[(0, 1)].abs()).max(b[(0, 1)].abs()).max(b[(1, 0)].abs());
        }
        Ok((worst, "off-diagonal, closed form and quadrature".into()))
    });
    suite.check("divergence.pythagorean", 1e-8, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 6);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let theta: f64 = rng.random_range(-2.0..2.0);
            let tau2 = rng.random_range(0.1..4.0);
            let phi_w: f64 = rng.random_range(-0.95..0.95);
            let d = theta.abs() + rng.random_range(0.05..3.0);
            let star = mininfo_to_ar1(&MinInfoArParams::new(vec![theta], tau2).map_err(s)?).map_err(s)?;
            let w_star = GaussianKernel::from_ar1(&star).map_err(s)?;
            let w = GaussianKernel::scalar(phi_w, tau2 * (1.0 - phi_w * phi_w)).map_err(s)?;
            let v = construct_e_kernel(theta, d).map_err(s)?.kernel;
            let gap = divergence_rate(&w, &w_star).map_err(s)? + divergence_rate(&w_star, &v).map_err(s)?
                - divergence_rate(&w, &v).map_err(s)?;
            worst = worst.max(gap.abs());
        }
        Ok((worst, "50 configurations".into()))
    });
    suite.check("divergence.self_and_sign", 1e-12, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 7);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let p = GaussianKernel::scalar(rng.random_range(-0.9..0.9), rng.random_range(0.1..2.0)).map_err(s)?;
            let q = GaussianKernel::scalar(rng.random_range(-0.9..0.9), rng.random_range(0.1..2.0)).map_err(s)?;
            worst = worst.max(divergence_rate(&p, &p).map_err(s)?.abs());
            worst = worst.max((-divergence_rate(&p, &q).map_err(s)?).max(0.0));
        }
        Ok((worst, "D(p|p) = 0 and D(p|q) ≥ 0".into()))
    });
    suite.check("e_kernel.matches_ar1", 1e-10, || {
        let k = construct_e_kernel(1.0, 1.25).map_err(s)?;
        let c = mininfo_to_ar1(&MinInfoArParams::new(vec![1.0], 2.0 / 3.0).map_err(s)?).map_err(s)?;
        let err = (k.slope() - c.phi()[0]).abs().max((k.conditional_variance() - c.sigma2()).abs());
        Ok((err, "θ = 1, D = 5/4".into()))
    });
}

fn statistic_checks(suite: &mut Suite, seed: u64) {
    suite.check("stats.swap_delta_vs_recompute", 1e-12, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 8);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let d = rng.random_range(1..=3);
            let p = rng.random_range(1..=2);
            let n = rng.random_range(2 * d + 2..40);
            let spec = random_spec(&mut rng, d, p);
            let series = random_series(&mut rng, n, p);
            let mut order = Permutation::identity(n, d);
            for _ in 0..5 {
                let a = rng.random_range(d..n - d);
                let b = rng.random_range(d..n - d);
                if a != b {
                    order.swap(a.min(b), a.max(b)).map_err(s)?;
                }
            }
            let s1 = rng.random_range(d..n - d - 1);
            let s2 = rng.random_range(s1 + 1..n - d);
            let delta = delta_statistic_swap(&spec, &series, &order, s1, s2).map_err(s)?;
            let before = total_statistic_ordered(&spec, &series, &order).map_err(s)?;
            let mut swapped = order.clone();
            swapped.swap(s1, s2).map_err(s)?;
            let after = total_statistic_ordered(&spec, &series, &swapped).map_err(s)?;
            let scale = after.iter().chain(&before).map(|v| v.abs()).fold(1.0, f64::max);
            for k in 0..delta.len() {
                worst = worst.max((before[k] + delta[k] - after[k]).abs() / scale);
            }
        }
        Ok((worst, "200 random specs, orders and swaps (relative)".into()))
    });
    suite.check("stats.kappa_delta_permutation_invariance", 1e-8, || {
        // Joint Gaussian AR(1) log-density minus θᵀH is the same for every
        // ordering that fixes the first and last observation.
        let (phi, sigma2) = (0.5, 0.5);
        let theta = phi / sigma2;
        let tau2 = sigma2 / (1.0 - phi * phi);
        let spec = DependenceSpec::ar(1).map_err(s)?;
        let series = ar1_sim(8, seed + 9);
        let ln_norm = |x: f64, mean: f64, var: f64| {
            -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (x - mean) * (x - mean) / var)
        };
        let mut order: Vec<usize> = (0..8).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 10);
        let mut values = Vec::new();
        for _ in 0..50 {
            let x = series.reordered(&order).map_err(s)?;
            let v = x.as_slice();
            let mut joint = ln_norm(v[0], 0.0, tau2);
            for t in 1..v.len() {
                joint += ln_norm(v[t], phi * v[t - 1], sigma2);
            }
            values.push(joint - theta * total_statistic(&spec, &x).map_err(s)?[0]);
            let a = rng.random_range(1..7);
            let b = rng.random_range(1..7);
            order.swap(a, b);
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((hi - lo, "spread over 50 orderings".into()))
    });
    suite.check("stats.reversal_invariance_ar1", 1e-12, || {
        let spec = DependenceSpec::ar(1).map_err(s)?;
        let series = ar1_sim(200, seed + 11);
        let rev: Vec<usize> = (0..200).rev().collect();
        let a = total_statistic(&spec, &series).map_err(s)?[0];
        let b = total_statistic(&spec, &series.reordered(&rev).map_err(s)?).map_err(s)?[0];
        Ok(((a - b).abs() / a.abs().max(1.0), String::new()))
    });
    suite.check("stats.multilinearity", 1e-12, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 12);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let d = rng.random_range(1..=3);
            let p = rng.random_range(1..=2);
            let spec = random_spec(&mut rng, d, p);
            let mut window: Vec<f64> = (0..(d + 1) * p).map(|_| rng.random_range(-2.0..2.0)).collect();
            let base = spec.eval(&window).map_err(s)?;
            let (lag, comp) = (rng.random_range(0..=d), rng.random_range(0..p));
            let c: f64 = rng.random_range(-3.0..3.0);
            window[lag * p + comp] *= c;
            let scaled = spec.eval(&window).map_err(s)?;
            for (term, (b, v)) in spec.terms().iter().zip(base.iter().zip(&scaled)) {
                let e = term
                    .factors()
                    .iter()
                    .find(|f| f.lag == lag && f.component == comp)
                    .map_or(0, |f| f.exponent);
                let want = b * c.powi(e as i32);
                worst = worst.max((v - want).abs() / want.abs().max(1.0));
            }
        }
        Ok((worst, "100 random windows".into()))
    });
}

fn mcle_checks(suite: &mut Suite, seed: u64) {
    let spec = DependenceSpec::ar(1).expect("valid");
    let small = ar1_sim(8, seed + 13);
    suite.check("mcle.zero_theta_acceptance", 0.0, || {
        let series = ar1_sim(100, seed + 14);
        let cfg = ExchangeConfig { n_samples: 5000, burn_in: 500, thin: 1, seed };
        let r = exchange_sample(&spec, &series, &[0.0], &cfg).map_err(s)?;
        Ok((1.0 - r.acceptance_rate(), format!("{} of {} accepted", r.accepted, r.proposals)))
    });
    suite.check("mcle.detailed_balance", 1e-12, || {
        let series = ar1_sim(60, seed + 15);
        let mut eval = SwapEvaluator::identity(&spec, &series).map_err(s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 16);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let s1 = rng.random_range(1..58);
            let s2 = rng.random_range(s1 + 1..59);
            let theta = [rng.random_range(-2.0..2.0)];
            let fwd = log_ratio_swap(&theta, &eval.delta(s1, s2).map_err(s)?);
            eval.apply_swap(s1, s2).map_err(s)?;
            let back = log_ratio_swap(&theta, &eval.delta(s1, s2).map_err(s)?);
            worst = worst.max((fwd + back).abs());
        }
        Ok((worst, "log ρ(forward) + log ρ(reverse), 200 swaps".into()))
    });
    suite.check("mcle.enumeration_equivalence", 1e-12, || {
        let mut fast = enumerate_statistics(&spec, &small, 8).map_err(s)?;
        let mut slow = enumerate_orderings(&spec, &small, EnumerationBudget::default()).map_err(s)?;
        if fast.len() != slow.len() {
            return Err(format!("{} vs {} orderings", fast.len(), slow.len()));
        }
        fast.sort_by(|a, b| a[0].total_cmp(&b[0]));
        slow.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let worst = fast.iter().zip(&slow).map(|(a, b)| (a[0] - b[0]).abs()).fold(0.0, f64::max);
        Ok((worst, format!("{} orderings", fast.len())))
    });
    suite.check("mcle.normalization", 1e-12, || {
        let all = enumerate_orderings(&spec, &small, EnumerationBudget::default()).map_err(s)?;
        let mut worst: f64 = 0.0;
        for theta in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            let logw: Vec<f64> = all.iter().map(|h| theta * h[0]).collect();
            let lz = log_sum_exp(&logw);
            worst = worst.max((logw.iter().map(|l| (l - lz).exp()).sum::<f64>() - 1.0).abs());
        }
        Ok((worst, "Σ_π f(π|θ), 5 values of θ".into()))
    });
    suite.check("mcle.expected_score_zero", 1e-10, || {
        let all = enumerate_statistics(&spec, &small, 8).map_err(s)?;
        let theta = [1.0];
        let (mu, _) = exact_moments(&all, &theta);
        let logw: Vec<f64> = all.iter().map(|h| theta[0] * h[0]).collect();
        let lz = log_sum_exp(&logw);
        let e: f64 = all.iter().zip(&logw).map(|(h, l)| (l - lz).exp() * (h[0] - mu[0])).sum();
        Ok((e.abs(), "E_θ[H − μ(θ)] at n = 8".into()))
    });
    suite.check("mcle.exact_scoring_vs_exact_cle", 1e-3, || {
        let mut worst: f64 = 0.0;
        let mut compared = 0;
        for k in 0..10 {
            let series = ar1_sim(8, seed + 100 + k);
            let oracle = match exact_cle(&spec, &series, EnumerationBudget::default()) {
                Ok(t) => t,
                Err(crate::Error::Unbounded { .. }) => continue,
                Err(e) => return Err(e.to_string()),
            };
            let cfg = ScoringConfig { grad_tol: 1e-12, max_iters: 200, ..Default::default() };
            let r = fisher_scoring_with(&spec, &series, &[0.0], &MomentSource::Exact { max_interior: 8 }, &cfg)
                .map_err(s)?;
            worst = worst.max((r.theta_hat[0] - oracle[0]).abs());
            compared += 1;
        }
        Ok((worst, format!("{compared} datasets with a finite maximizer")))
    });
}

fn ple_checks(suite: &mut Suite, seed: u64) {
    let spec = DependenceSpec::ar(1).expect("valid");
    let series = ar1_sim(120, seed + 17);
    let pairs = all_pair_statistics(&spec, &series).expect("valid interior");
    suite.check("ple.log_pl_at_zero", 1e-9, || {
        let want = n_pairs(118) as f64 * 0.5f64.ln();
        Ok(((log_pl(&[0.0], &pairs) - want).abs() / want.abs(), format!("{} pairs (relative)", pairs.len())))
    });
    suite.check("ple.gradient_finite_differences", 1e-6, || {
        let spec2 = DependenceSpec::ar(2).map_err(s)?;
        let pairs2 = all_pair_statistics(&spec2, &series).map_err(s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 18);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let theta = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let g = log_pl_gradient(&theta, &pairs2);
            for i in 0..2 {
                let h = 1e-5;
                let (mut up, mut dn) = (theta, theta);
                up[i] += h;
                dn[i] -= h;
                let fd = (log_pl(&up, &pairs2) - log_pl(&dn, &pairs2)) / (2.0 * h);
                worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
            }
        }
        Ok((worst, "relative error, 10 random θ".into()))
    });
    suite.check("ple.pair_is_negated_delta", 0.0, || {
        let order = Permutation::identity(series.len(), 1);
        let mut worst: f64 = 0.0;
        for p in pairs.iter().step_by(97) {
            let delta = delta_statistic_swap(&spec, &series, &order, p.s1, p.s2).map_err(s)?;
            worst = worst.max((p.x[0] + delta[0]).abs());
        }
        Ok((worst, String::new()))
    });
    suite.check("ple.monotone_objective", 0.0, || {
        let r = fit_naive(&spec, &series, &GdConfig::default()).map_err(s)?;
        let drop = r.objective_trace.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        Ok((drop.max(r.log_pl.max(0.0)), format!("{} epochs, log_pl {:.3}", r.epochs, r.log_pl)))
    });
}
