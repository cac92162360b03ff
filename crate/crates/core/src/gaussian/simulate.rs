use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ar::{autocovariances, ClassicalArParams};
use super::var::{stationary_covariance, ClassicalVarParams};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Burn-in floor when the recursion starts from zeros instead of the exact
/// stationary law.
pub const MIN_BURN_IN_ZERO_INIT: usize = 500;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Simulates `x_t = Σ φ_i x_{t-i} + ε_t`, `ε_t ~ N(0, σ²)`.
///
/// For `d ≤ 2` the first `d` values come from the exact stationary law;
/// higher orders start from zeros and use at least
/// [`MIN_BURN_IN_ZERO_INIT`] burn-in steps. Same seed, same output.
pub fn simulate_ar(params: &ClassicalArParams, n: usize, burn_in: usize, seed: u64) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::Config("series length must be positive".into()));
    }
    let phi = params.phi();
    let d = phi.len();
    let sd = params.sigma2().sqrt();
    let mut rng = rng_for(seed);
    let (mut xs, burn_in) = match d {
        1 => {
            let g = autocovariances(phi, params.sigma2(), 0);
            (vec![g[0].sqrt() * normal(&mut rng)], burn_in)
        }
        2 => {
            let g = autocovariances(phi, params.sigma2(), 1);
            let rho = g[1] / g[0];
            let x0 = g[0].sqrt() * normal(&mut rng);
            let x1 = rho * x0 + (g[0] * (1.0 - rho * rho)).sqrt() * normal(&mut rng);
            (vec![x0, x1], burn_in)
        }
        _ => (vec![0.0; d], burn_in.max(MIN_BURN_IN_ZERO_INIT)),
    };
    let total = burn_in + n;
    xs.reserve(total.saturating_sub(xs.len()));
    while xs.len() < total {
        let t = xs.len();
        let mean: f64 = phi.iter().enumerate().map(|(i, f)| f * xs[t - 1 - i]).sum();
        xs.push(mean + sd * normal(&mut rng));
    }
    TimeSeries::univariate(xs[burn_in..burn_in + n].to_vec())
}

/// Simulates `x_t = Σ A_k x_{t-k} + ε_t`, `ε_t ~ N(0, Σ)`.
///
/// VAR(1) starts from the stationary law `N(0, B)`; higher orders start
/// from zeros with at least [`MIN_BURN_IN_ZERO_INIT`] burn-in steps.
pub fn simulate_var(params: &ClassicalVarParams, n: usize, burn_in: usize, seed: u64) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::Config("series length must be positive".into()));
    }
    let p = params.dim();
    let d = params.order();
    let noise_l = params
        .sigma()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::ParameterDomain("Σ is not positive definite".into()))?
        .l();
    let mut rng = rng_for(seed);
    let draw = |rng: &mut ChaCha8Rng, l: &DMatrix<f64>| -> DVector<f64> {
        l * DVector::from_fn(p, |_, _| normal(rng))
    };
    let mut states: Vec<DVector<f64>> = Vec::new();
    let burn_in = if d == 1 {
        let b = stationary_covariance(&params.a()[0], params.sigma())?;
        let bl = b
            .cholesky()
            .ok_or_else(|| Error::Internal("stationary covariance is not positive definite".into()))?
            .l();
        states.push(draw(&mut rng, &bl));
        burn_in
    } else {
        states.extend(std::iter::repeat_n(DVector::zeros(p), d));
        burn_in.max(MIN_BURN_IN_ZERO_INIT)
    };
    let total = burn_in + n;
    while states.len() < total {
        let t = states.len();
        let mut next = draw(&mut rng, &noise_l);
        for (k, a) in params.a().iter().enumerate() {
            next += a * &states[t - 1 - k];
        }
        states.push(next);
    }
    let data = states[burn_in..burn_in + n].iter().flat_map(|s| s.iter().copied()).collect();
    TimeSeries::real(data, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_var(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n
    }

    fn lag1_corr(x: &[f64]) -> f64 {
        let n = x.len();
        let m = x.iter().sum::<f64>() / n as f64;
        let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
        let c1: f64 = (1..n).map(|t| (x[t] - m) * (x[t - 1] - m)).sum();
        c1 / c0
    }

    #[test]
    fn white_noise_has_unit_variance() {
        let p = ClassicalArParams::new(vec![0.0], 1.0).unwrap();
        let s = simulate_ar(&p, 100_000, 0, 1).unwrap();
        assert!((sample_var(s.as_slice()) - 1.0).abs() < 0.03);
    }

    #[test]
    fn ar1_stationary_variance() {
        let p = ClassicalArParams::new(vec![0.5], 0.5).unwrap();
        let s = simulate_ar(&p, 100_000, 0, 2).unwrap();
        assert!((sample_var(s.as_slice()) / (2.0 / 3.0) - 1.0).abs() < 0.03);
    }

    #[test]
    fn ar2_lag_one_autocorrelation() {
        let p = ClassicalArParams::new(vec![0.5, 0.3], 0.5).unwrap();
        let s = simulate_ar(&p, 100_000, 0, 3).unwrap();
        assert!((lag1_corr(s.as_slice()) / (5.0 / 7.0) - 1.0).abs() < 0.03);
    }

    #[test]
    fn same_seed_same_series() {
        let p = ClassicalArParams::new(vec![0.5, 0.3, 0.1], 0.5).unwrap();
        let a = simulate_ar(&p, 500, 10, 9).unwrap();
        let b = simulate_ar(&p, 500, 10, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_ar(&p, 500, 10, 10).unwrap());
    }

    #[test]
    fn var1_sample_covariance_matches_lyapunov() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.5]);
        let params = ClassicalVarParams::new(vec![a.clone()], DMatrix::identity(2, 2) * 0.5).unwrap();
        let b = stationary_covariance(&a, params.sigma()).unwrap();
        let s = simulate_var(&params, 100_000, 0, 4).unwrap();
        let n = s.len() as f64;
        for i in 0..2 {
            for j in 0..2 {
                let cov = (0..s.len()).map(|t| s.get(t, i) * s.get(t, j)).sum::<f64>() / n;
                assert!((cov - b[(i, j)]).abs() < 0.03 * b[(i, j)].abs().max(b[(0, 0)] * 0.5), "{i}{j}");
            }
        }
    }

    #[test]
    fn diagonal_var_behaves_as_independent_ar1() {
        let params = ClassicalVarParams::new(
            vec![DMatrix::from_diagonal_element(2, 2, 0.5)],
            DMatrix::identity(2, 2) * 0.5,
        )
        .unwrap();
        let s = simulate_var(&params, 100_000, 0, 5).unwrap();
        for c in 0..2 {
            let col = s.column(c);
            assert!((sample_var(&col) / (2.0 / 3.0) - 1.0).abs() < 0.03);
            assert!((lag1_corr(&col) - 0.5).abs() < 0.015);
        }
        let cross = (0..s.len()).map(|t| s.get(t, 0) * s.get(t, 1)).sum::<f64>() / s.len() as f64;
        assert!(cross.abs() < 0.02);
    }

    #[test]
    fn white_noise_var_is_standard_normal() {
        let params = ClassicalVarParams::new(vec![DMatrix::zeros(3, 3)], DMatrix::identity(3, 3)).unwrap();
        let s = simulate_var(&params, 50_000, 0, 6).unwrap();
        for c in 0..3 {
            assert!((sample_var(&s.column(c)) - 1.0).abs() < 0.04);
        }
    }
}
