use nalgebra::{DMatrix, Matrix2};

use super::ar::ClassicalArParams;
use super::linalg::{check_spd, inverse_spd, ln_det_spd, symmetrize};
use super::var::{stationary_covariance, ClassicalVarParams};
use crate::error::{Error, Result};

const LYAPUNOV_TOL: f64 = 1e-8;

/// First-order kernel `y | x ~ N(F x, S)` with optional stationary covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    f: DMatrix<f64>,
    s: DMatrix<f64>,
    stationary_cov: Option<DMatrix<f64>>,
}

impl GaussianKernel {
    pub fn new(f: DMatrix<f64>, s: DMatrix<f64>, stationary_cov: Option<DMatrix<f64>>) -> Result<Self> {
        check_spd(&s, "S", 1e-12)?;
        let p = s.nrows();
        if f.shape() != (p, p) {
            return Err(Error::Shape(format!("F is {:?}, expected {p}×{p}", f.shape())));
        }
        if let Some(b) = &stationary_cov {
            check_spd(b, "stationary covariance", 1e-12)?;
            if b.shape() != (p, p) {
                return Err(Error::Shape("stationary covariance has the wrong shape".into()));
            }
            let resid = (b - &f * b * f.transpose() - &s).abs().max();
            if resid > LYAPUNOV_TOL * b.abs().max().max(1.0) {
                return Err(Error::ParameterDomain(format!(
                    "stationary covariance violates B = FBFᵀ + S (residual {resid:e})"
                )));
            }
        }
        Ok(Self { f, s: symmetrize(&s), stationary_cov: stationary_cov.map(|b| symmetrize(&b)) })
    }

    /// Scalar kernel; stationary variance filled in when `|slope| < 1`.
    pub fn scalar(slope: f64, noise: f64) -> Result<Self> {
        let b = (slope.abs() < 1.0).then(|| DMatrix::from_element(1, 1, noise / (1.0 - slope * slope)));
        Self::new(DMatrix::from_element(1, 1, slope), DMatrix::from_element(1, 1, noise), b)
    }

    pub fn from_ar1(params: &ClassicalArParams) -> Result<Self> {
        if params.order() != 1 {
            return Err(Error::ParameterDomain(format!("expected AR(1), got AR({})", params.order())));
        }
        Self::scalar(params.phi()[0], params.sigma2())
    }

    pub fn from_var1(params: &ClassicalVarParams) -> Result<Self> {
        if params.order() != 1 {
            return Err(Error::ParameterDomain(format!("expected VAR(1), got VAR({})", params.order())));
        }
        let a = params.a()[0].clone();
        let b = stationary_covariance(&a, params.sigma())?;
        Self::new(a, params.sigma().clone(), Some(b))
    }

    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn stationary_cov(&self) -> Option<&DMatrix<f64>> {
        self.stationary_cov.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// Log density of `y` given `x` (scalar kernels only).
    pub fn ln_density_scalar(&self, x: f64, y: f64) -> f64 {
        let mean = self.f[(0, 0)] * x;
        let var = self.s[(0, 0)];
        -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (y - mean) * (y - mean) / var)
    }
}

/// Scalar kernel `exp(θxy − K x² − (D−K) y² − C)` from the dependence family.
#[derive(Debug, Clone, PartialEq)]
pub struct EKernel {
    pub theta: f64,
    pub d: f64,
    pub k: f64,
    /// Log normalizer `½ ln(π / (D − K))`.
    pub c: f64,
    pub kernel: GaussianKernel,
}

impl EKernel {
    pub fn slope(&self) -> f64 {
        self.kernel.f()[(0, 0)]
    }

    pub fn conditional_variance(&self) -> f64 {
        self.kernel.s()[(0, 0)]
    }

    pub fn stationary_variance(&self) -> f64 {
        1.0 / (2.0 * (self.d * self.d - self.theta * self.theta).sqrt())
    }

    pub fn ln_density(&self, x: f64, y: f64) -> f64 {
        self.theta * x * y - self.k * x * x - (self.d - self.k) * y * y - self.c
    }
}

pub fn construct_e_kernel(theta: f64, d: f64) -> Result<EKernel> {
    if !theta.is_finite() || !d.is_finite() {
        return Err(Error::ParameterDomain("θ and D must be finite".into()));
    }
    if !(d > theta.abs()) {
        return Err(Error::ParameterDomain(format!("need D > |θ|, got D={d}, θ={theta}")));
    }
    let root = (d * d - theta * theta).sqrt();
    let k = 0.5 * (d - root);
    let m = d - k;
    let slope = theta / (2.0 * m);
    let noise = 1.0 / (2.0 * m);
    let b = 1.0 / (2.0 * root);
    let kernel = GaussianKernel::new(
        DMatrix::from_element(1, 1, slope),
        DMatrix::from_element(1, 1, noise),
        Some(DMatrix::from_element(1, 1, b)),
    )?;
    Ok(EKernel { theta, d, k, c: 0.5 * (std::f64::consts::PI / m).ln(), kernel })
}

/// Expected conditional KL divergence of `q` from `p` under `p`'s stationary law.
pub fn divergence_rate(p: &GaussianKernel, q: &GaussianKernel) -> Result<f64> {
    let b = p
        .stationary_cov()
        .ok_or_else(|| Error::ParameterDomain("divergence rate needs the stationary covariance of p".into()))?;
    if p.dim() != q.dim() {
        return Err(Error::Shape(format!("kernel dimensions differ: {} vs {}", p.dim(), q.dim())));
    }
    let dim = p.dim() as f64;
    let sq_inv = inverse_spd(q.s())?;
    let df = p.f() - q.f();
    let quad = (b * df.transpose() * &sq_inv * &df).trace();
    let value = 0.5 * (ln_det_spd(q.s())? - ln_det_spd(p.s())? - dim + (&sq_inv * p.s()).trace() + quad);
    Ok(value.max(0.0))
}

/// Fisher information of the AR(1) model in `(θ, τ²)` coordinates.
pub fn ar1_fisher_info(theta: f64, tau2: f64) -> Result<Matrix2<f64>> {
    if !(tau2 > 0.0) || !theta.is_finite() {
        return Err(Error::ParameterDomain(format!("need finite θ and τ² > 0, got θ={theta}, τ²={tau2}")));
    }
    let tau4 = tau2 * tau2;
    let r = (1.0 + 4.0 * theta * theta * tau4).sqrt();
    let g_theta = 2.0 * tau4 / (r * (1.0 + r));
    let g_tau = 1.0 / (2.0 * tau4 * r);
    Ok(Matrix2::new(g_theta, 0.0, 0.0, g_tau))
}
