use nalgebra::{DMatrix, DVector};

use super::linalg::{check_spd, companion, floor_eigenvalues, spectral_radius, symmetrize};
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const PD_FLOOR: f64 = 1e-12;

/// VAR(d) coefficient matrices `A_1, …, A_d` and noise covariance `Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalVarParams {
    a: Vec<DMatrix<f64>>,
    sigma: DMatrix<f64>,
}

impl ClassicalVarParams {
    pub fn new(a: Vec<DMatrix<f64>>, sigma: DMatrix<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::ParameterDomain("VAR order must be at least 1".into()));
        }
        check_spd(&sigma, "Σ", SYMMETRY_TOL)?;
        let p = sigma.nrows();
        for (k, m) in a.iter().enumerate() {
            if m.shape() != (p, p) {
                return Err(Error::Shape(format!("A_{} is {:?}, expected {p}×{p}", k + 1, m.shape())));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::ParameterDomain(format!("A_{} has non-finite entries", k + 1)));
            }
        }
        let rho = spectral_radius(&companion(&a));
        if !(rho < 1.0) {
            return Err(Error::Stationarity(format!("companion spectral radius {rho} >= 1")));
        }
        Ok(Self { a, sigma: symmetrize(&sigma) })
    }

    pub fn a(&self) -> &[DMatrix<f64>] {
        &self.a
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }
}

/// `Θ = AᵀΣ⁻¹` and the stationary covariance `B` of a VAR(1).
#[derive(Debug, Clone, PartialEq)]
pub struct MinInfoVarParams {
    theta: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl MinInfoVarParams {
    pub fn new(theta: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        check_spd(&b, "B", SYMMETRY_TOL)?;
        if theta.shape() != b.shape() {
            return Err(Error::Shape(format!("Θ is {:?} but B is {:?}", theta.shape(), b.shape())));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::ParameterDomain("Θ has non-finite entries".into()));
        }
        Ok(Self { theta, b: symmetrize(&b) })
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// `vec(Θ)`, stacking columns.
    pub fn theta_vec(&self) -> Vec<f64> {
        self.theta.as_slice().to_vec()
    }
}

/// Stationary covariance `B = A B Aᵀ + Σ` of a stable VAR(1).
///
/// Dense Kronecker solve for `p ≤ 8`, squared-doubling accumulation of
/// `Σ_k A^k Σ (Aᵀ)^k` otherwise.
pub fn stationary_covariance(a: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = a.nrows();
    if p <= 8 {
        let lhs = DMatrix::<f64>::identity(p * p, p * p) - a.kronecker(a);
        let rhs = DVector::from_column_slice(sigma.as_slice());
        let sol = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Stationarity("I − A⊗A is singular".into()))?;
        return Ok(symmetrize(&DMatrix::from_column_slice(p, p, sol.as_slice())));
    }
    let rho = spectral_radius(a);
    if !(rho < 1.0) {
        return Err(Error::Stationarity(format!("spectral radius {rho} >= 1")));
    }
    let mut b = sigma.clone();
    let mut power = a.clone();
    for _ in 0..64 {
        b = &b + &power * &b * power.transpose();
        power = &power * &power;
        if power.abs().max() < 1e-18 {
            break;
        }
    }
    Ok(symmetrize(&b))
}

/// Forward map `(A, Σ) ↦ (Θ = AᵀΣ⁻¹, B)` for a VAR(1).
pub fn var1_to_mininfo(params: &ClassicalVarParams) -> Result<MinInfoVarParams> {
    if params.order() != 1 {
        return Err(Error::ParameterDomain(format!("expected VAR(1), got VAR({})", params.order())));
    }
    let a = &params.a()[0];
    let sigma = params.sigma();
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::ParameterDomain("Σ is not positive definite".into()))?;
    let theta = chol.solve(a).transpose();
    let b = stationary_covariance(a, sigma)?;
    MinInfoVarParams::new(theta, b)
}

/// Controls for the Riccati solve in [`mininfo_to_var1_with`].
#[derive(Debug, Clone, Copy)]
pub struct RiccatiOptions {
    /// Converged once `‖B − ΣΘᵀBΘΣ − Σ‖_F < tol · ‖B‖_F`.
    pub tol: f64,
    pub max_fixed_point: usize,
    pub max_newton: usize,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_fixed_point: 10_000, max_newton: 100 }
    }
}

fn riccati_residual(sigma: &DMatrix<f64>, r: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    sigma * r * sigma + sigma - b
}

/// Inverse map `(Θ, B) ↦ (A, Σ)` with default [`RiccatiOptions`].
pub fn mininfo_to_var1(params: &MinInfoVarParams) -> Result<ClassicalVarParams> {
    mininfo_to_var1_with(params, &RiccatiOptions::default())
}

/// Solves `B = ΣΘᵀBΘΣ + Σ` for positive definite `Σ`, then `A = ΣΘᵀ`.
///
/// Damped fixed-point iteration `Σ ← (1−γ)Σ + γ(B − ΣRΣ)` with `R = ΘᵀBΘ`,
/// halving `γ` whenever the residual grows; Newton on the residual map
/// (a Sylvester solve per step) takes over if the fixed point stalls.
pub fn mininfo_to_var1_with(params: &MinInfoVarParams, opts: &RiccatiOptions) -> Result<ClassicalVarParams> {
    let theta = params.theta();
    let b = params.b();
    let p = b.nrows();
    let r = theta.transpose() * b * theta;
    let target = opts.tol * b.norm();

    let mut sigma = b.clone();
    let mut res = riccati_residual(&sigma, &r, b).norm();
    let mut gamma = 0.5;
    let mut iters = 0;
    while res >= target && iters < opts.max_fixed_point && gamma > 1e-10 {
        iters += 1;
        let step = b - &sigma * &r * &sigma;
        let cand = floor_eigenvalues(&(&sigma * (1.0 - gamma) + step * gamma), PD_FLOOR);
        let cand_res = riccati_residual(&cand, &r, b).norm();
        if cand_res < res {
            sigma = cand;
            res = cand_res;
            gamma = (gamma * 1.25).min(1.0);
        } else {
            gamma *= 0.5;
        }
    }

    let mut newton_steps = 0;
    while res >= target && newton_steps < opts.max_newton {
        newton_steps += 1;
        let f = riccati_residual(&sigma, &r, b);
        // d/dΣ (ΣRΣ + Σ) applied to dΣ is dΣ·RΣ + ΣR·dΣ + dΣ.
        let eye = DMatrix::<f64>::identity(p, p);
        let jac = (&r * &sigma).transpose().kronecker(&eye) + eye.kronecker(&(&sigma * &r))
            + DMatrix::<f64>::identity(p * p, p * p);
        let rhs = -DVector::from_column_slice(f.as_slice());
        let Some(delta) = jac.lu().solve(&rhs) else { break };
        let delta = symmetrize(&DMatrix::from_column_slice(p, p, delta.as_slice()));
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-8 {
            let cand = floor_eigenvalues(&(&sigma + &delta * lambda), PD_FLOOR);
            let cand_res = riccati_residual(&cand, &r, b).norm();
            if cand_res < res {
                sigma = cand;
                res = cand_res;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }

    if !(res < target) {
        return Err(Error::NoSolution(format!(
            "Riccati residual {res:e} above {target:e} after {iters} fixed-point and {newton_steps} Newton steps"
        )));
    }
    let a = &sigma * theta.transpose();
    ClassicalVarParams::new(vec![a], sigma)
        .map_err(|e| Error::NoSolution(format!("Riccati solution is not a stationary VAR(1): {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn table_var1() -> ClassicalVarParams {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.5]);
        ClassicalVarParams::new(vec![a], DMatrix::identity(2, 2) * 0.5).unwrap()
    }

    fn random_var1(rng: &mut ChaCha8Rng, p: usize) -> ClassicalVarParams {
        loop {
            let mut a = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
            let rho = spectral_radius(&a);
            a *= rng.random_range(0.05..0.9) / rho.max(1e-3);
            let l = DMatrix::from_fn(p, p, |i, j| if j <= i { rng.random_range(-1.0..1.0) } else { 0.0 });
            let sigma = &l * l.transpose() + DMatrix::identity(p, p) * 0.2;
            if let Ok(params) = ClassicalVarParams::new(vec![a], sigma) {
                return params;
            }
        }
    }

    #[test]
    fn table_theta() {
        let m = var1_to_mininfo(&table_var1()).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]);
        assert!((m.theta() - want).abs().max() < 1e-12);
    }

    #[test]
    fn lyapunov_identity() {
        let params = table_var1();
        let b = stationary_covariance(&params.a()[0], params.sigma()).unwrap();
        let a = &params.a()[0];
        let resid = &b - a * &b * a.transpose() - params.sigma();
        assert!(resid.norm() < 1e-14);
    }

    #[test]
    fn doubling_matches_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = random_var1(&mut rng, 9);
        let b = stationary_covariance(&params.a()[0], params.sigma()).unwrap();
        let a = &params.a()[0];
        let resid = &b - a * &b * a.transpose() - params.sigma();
        assert!(resid.norm() < 1e-10 * b.norm());
    }

    #[test]
    fn zero_theta_gives_independent_noise() {
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let c = mininfo_to_var1(&MinInfoVarParams::new(DMatrix::zeros(2, 2), b.clone()).unwrap()).unwrap();
        assert!(c.a()[0].abs().max() < 1e-14);
        assert!((c.sigma() - b).abs().max() < 1e-12);
    }

    #[test]
    fn round_trip_random_var1() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let p = rng.random_range(1..=3);
            let c = random_var1(&mut rng, p);
            let back = mininfo_to_var1(&var1_to_mininfo(&c).unwrap()).unwrap();
            let da = (&back.a()[0] - &c.a()[0]).abs().max();
            let ds = (back.sigma() - c.sigma()).abs().max();
            assert!(da < 1e-8 && ds < 1e-8, "{da:e} {ds:e}");
        }
    }

    #[test]
    fn loose_tolerance_spoils_round_trip() {
        let c = table_var1();
        let opts = RiccatiOptions { tol: 1e-2, ..Default::default() };
        let back = mininfo_to_var1_with(&var1_to_mininfo(&c).unwrap(), &opts).unwrap();
        assert!((back.sigma() - c.sigma()).abs().max() > 1e-10);
    }

    #[test]
    fn explosive_var_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.1, 0.0, 0.0, 0.2]);
        assert!(matches!(
            ClassicalVarParams::new(vec![a], DMatrix::identity(2, 2)),
            Err(Error::Stationarity(_))
        ));
    }

    #[test]
    fn non_pd_noise_is_rejected() {
        let a = DMatrix::zeros(2, 2);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(ClassicalVarParams::new(vec![a], s).is_err());
    }
}
