//! Reference implementations used to validate the estimators.
//!
//! These deliberately avoid the fast paths they check: enumeration walks
//! permutations in lexicographic order and recomputes `H` from scratch, and
//! the Fisher information is integrated numerically from the transform
//! formulas rather than taken from the closed form.

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    ard_to_mininfo, var1_to_mininfo, ClassicalArParams, ClassicalVarParams, MinInfoArParams, MinInfoVarParams,
};
use crate::series::TimeSeries;
use crate::spec::DependenceSpec;
use crate::stats::total_statistic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBudget {
    pub max_interior: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self { max_interior: 8 }
    }
}

fn lagged_design(series: &TimeSeries, d: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = series.len();
    let p = series.dim();
    if d == 0 {
        return Err(Error::Config("order must be at least 1".into()));
    }
    if n < 2 * d + 2 {
        return Err(Error::InsufficientData { needed: 2 * d + 1, got: n });
    }
    let rows = n - d;
    let x = DMatrix::from_fn(rows, d * p, |r, c| series.get(r + d - 1 - c / p, c % p));
    let y = DMatrix::from_fn(rows, p, |r, c| series.get(r + d, c));
    Ok((x, y))
}

fn least_squares(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::Rank(format!("singular values range {smin:e} to {smax:e}")));
    }
    svd.solve(y, 0.0).map_err(|e| Error::Rank(e.to_string()))
}

/// Conditional least squares on the first `d` observations: `φ̂` by OLS,
/// `σ̂² = RSS / (n − d)`.
pub fn mle_ols_ar(series: &TimeSeries, d: usize) -> Result<(ClassicalArParams, MinInfoArParams)> {
    if series.dim() != 1 {
        return Err(Error::Shape("mle_ols_ar needs a univariate series".into()));
    }
    let (x, y) = lagged_design(series, d)?;
    let beta = least_squares(&x, &y)?;
    let resid = &y - &x * &beta;
    let sigma2 = resid.norm_squared() / (series.len() - d) as f64;
    let classical = ClassicalArParams::new(beta.column(0).iter().copied().collect(), sigma2)?;
    let mininfo = ard_to_mininfo(&classical)?;
    Ok((classical, mininfo))
}

/// Multivariate analogue of [`mle_ols_ar`]; minimum-information parameters
/// are returned for `d = 1` only.
pub fn mle_ols_var(series: &TimeSeries, d: usize) -> Result<(ClassicalVarParams, Option<MinInfoVarParams>)> {
    let p = series.dim();
    let (x, y) = lagged_design(series, d)?;
    let beta = least_squares(&x, &y)?;
    let resid = &y - &x * &beta;
    let sigma = resid.transpose() * &resid / (series.len() - d) as f64;
    let blocks: Vec<DMatrix<f64>> = (0..d).map(|k| beta.rows(k * p, p).transpose()).collect();
    let classical = ClassicalVarParams::new(blocks, sigma)?;
    let mininfo = if d == 1 { Some(var1_to_mininfo(&classical)?) } else { None };
    Ok((classical, mininfo))
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `H` of every interior ordering, identity first, each recomputed in full.
pub fn enumerate_orderings(
    spec: &DependenceSpec,
    series: &TimeSeries,
    budget: EnumerationBudget,
) -> Result<Vec<Vec<f64>>> {
    let n = series.len();
    let d = spec.order();
    let m = n.saturating_sub(2 * d);
    if m < 2 {
        return Err(Error::InsufficientInterior { interior: m });
    }
    if m > budget.max_interior {
        return Err(Error::BudgetExceeded { interior: m, max: budget.max_interior });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        out.push(total_statistic(spec, &series.reordered(&order)?)?);
        if !next_permutation(&mut order[d..n - d]) {
            break;
        }
    }
    Ok(out)
}

fn log_normalizer(stats: &[Vec<f64>], theta: &[f64]) -> f64 {
    let e: Vec<f64> = stats.iter().map(|h| h.iter().zip(theta).map(|(a, b)| a * b).sum()).collect();
    let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + e.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// `f(id|θ) = exp(θᵀH_id) / Σ_π exp(θᵀH_π)` by exhaustive enumeration.
pub fn exact_conditional_likelihood(
    spec: &DependenceSpec,
    series: &TimeSeries,
    theta: &[f64],
    budget: EnumerationBudget,
) -> Result<f64> {
    if theta.len() != spec.k() {
        return Err(Error::Shape(format!("θ has {} entries, spec has K = {}", theta.len(), spec.k())));
    }
    let stats = enumerate_orderings(spec, series, budget)?;
    let own: f64 = stats[0].iter().zip(theta).map(|(a, b)| a * b).sum();
    Ok((own - log_normalizer(&stats, theta)).exp())
}

/// Maximizer of `log f(id|θ)` by damped Newton with enumerated moments.
///
/// Fails with [`Error::Unbounded`] when the likelihood keeps increasing
/// along a direction, i.e. the observed `H` is an extreme point of the
/// statistic set.
pub fn exact_cle(spec: &DependenceSpec, series: &TimeSeries, budget: EnumerationBudget) -> Result<Vec<f64>> {
    let stats = enumerate_orderings(spec, series, budget)?;
    let k = spec.k();
    let h_obs = stats[0].clone();
    if k == 1 {
        let above = stats.iter().any(|h| h[0] > h_obs[0]);
        let below = stats.iter().any(|h| h[0] < h_obs[0]);
        if above != below {
            return Err(Error::Unbounded { direction: vec![if below { 1.0 } else { -1.0 }] });
        }
    }
    let loglik = |theta: &[f64]| -> f64 {
        h_obs.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() - log_normalizer(&stats, theta)
    };
    let scale = stats.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
    let mut theta = vec![0.0; k];
    let mut value = loglik(&theta);
    for _ in 0..500 {
        let lz = log_normalizer(&stats, &theta);
        let mut mean = DVector::zeros(k);
        let weights: Vec<f64> = stats
            .iter()
            .map(|h| (h.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>() - lz).exp())
            .collect();
        for (h, w) in stats.iter().zip(&weights) {
            mean += DVector::from_column_slice(h) * *w;
        }
        let mut cov = DMatrix::zeros(k, k);
        for (h, w) in stats.iter().zip(&weights) {
            let c = DVector::from_column_slice(h) - &mean;
            cov += &c * c.transpose() * *w;
        }
        let score = DVector::from_column_slice(&h_obs) - &mean;
        if score.norm() <= 1e-13 * scale {
            return Ok(theta);
        }
        let ridge = 1e-14 * cov.trace().max(f64::MIN_POSITIVE);
        let step = (cov + DMatrix::identity(k, k) * ridge)
            .cholesky()
            .map(|c| c.solve(&score))
            .unwrap_or_else(|| score.clone());
        let mut lambda = 1.0;
        let mut moved = false;
        while lambda > 1e-12 {
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + lambda * s).collect();
            let v = loglik(&cand);
            if v > value {
                theta = cand;
                value = v;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e4 {
            return Err(Error::Unbounded { direction: theta.iter().map(|v| v / norm).collect() });
        }
        if !moved {
            // Stalled with almost all mass on orderings sharing the observed H:
            // the optimum sits at infinity.
            let tied: f64 = stats
                .iter()
                .zip(&weights)
                .filter(|(h, _)| h.iter().zip(&h_obs).all(|(a, b)| (a - b).abs() <= 1e-12 * scale))
                .map(|(_, w)| w)
                .sum();
            if tied > 1.0 - 1e-9 && norm > 0.0 {
                return Err(Error::Unbounded { direction: theta.iter().map(|v| v / norm).collect() });
            }
            return Ok(theta);
        }
    }
    Ok(theta)
}

/// Nodes and weights of `n`-point Gauss–Hermite quadrature (weight `e^{−x²}`)
/// from the eigen-decomposition of the Jacobi matrix.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jac = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64 / 2.0).sqrt() } else { 0.0 });
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `δ(y)` of the AR(1) kernel written as `exp(θxy + κ(y) − κ(x) − δ(y))`,
/// parametrized by `(θ, τ²)` through the inverse transform.
fn ar1_delta(theta: f64, tau2: f64, y: f64) -> f64 {
    let r = (1.0 + 4.0 * theta * theta * tau2 * tau2).sqrt();
    let sigma2 = 2.0 * tau2 / (1.0 + r);
    let phi = 2.0 * theta * tau2 / (1.0 + r);
    (1.0 + phi * phi) * y * y / (2.0 * sigma2) + 0.5 * (2.0 * std::f64::consts::PI * sigma2).ln()
}

/// `E_{y~N(0,τ²)}[∇²δ(y)]` with 64-node Gauss–Hermite quadrature and
/// central-difference Hessians (relative step `1e-3`, Richardson-extrapolated).
pub fn ar1_fisher_info_numeric(theta: f64, tau2: f64) -> Result<Matrix2<f64>> {
    if !(tau2 > 0.0) || !theta.is_finite() {
        return Err(Error::ParameterDomain(format!("need finite θ and τ² > 0, got θ={theta}, τ²={tau2}")));
    }
    let (nodes, weights) = gauss_hermite(64);
    let h = [1e-3 * theta.abs().max(1.0), 1e-3 * tau2];
    let at = |a: f64, b: f64| -> f64 {
        nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * ar1_delta(a, b, (2.0 * tau2).sqrt() * x))
            .sum::<f64>()
            / std::f64::consts::PI.sqrt()
    };
    let p = [theta, tau2];
    let hessian = |scale: f64| {
        let h = [h[0] * scale, h[1] * scale];
        let mut g = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let shifted = |si: f64, sj: f64| {
                    let mut q = p;
                    q[i] += si * h[i];
                    q[j] += sj * h[j];
                    at(q[0], q[1])
                };
                g[(i, j)] = if i == j {
                    (shifted(0.5, 0.5) - 2.0 * at(p[0], p[1]) + shifted(-0.5, -0.5)) / (h[i] * h[i])
                } else {
                    (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0) + shifted(-1.0, -1.0))
                        / (4.0 * h[i] * h[j])
                };
            }
        }
        g
    };
    // One Richardson step cancels the O(h²) truncation term.
    let g = (hessian(0.5) * 4.0 - hessian(1.0)) / 3.0;
    Ok(g)
}
