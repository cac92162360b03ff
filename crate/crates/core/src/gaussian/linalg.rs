use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub(crate) fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 {
        return m[(0, 0)].abs();
    }
    // Bounded Schur iteration; the unbounded default can spin forever.
    match m.clone().try_schur(f64::EPSILON, 10_000) {
        Some(schur) => schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max),
        None => f64::NAN,
    }
}

/// Block companion matrix of `x_t = Σ_k A_k x_{t-k}`.
pub(crate) fn companion(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let d = blocks.len();
    let p = blocks[0].nrows();
    let mut c = DMatrix::zeros(d * p, d * p);
    for (k, a) in blocks.iter().enumerate() {
        c.view_mut((0, k * p), (p, p)).copy_from(a);
    }
    for i in p..d * p {
        c[(i, i - p)] = 1.0;
    }
    c
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric and positive definite (Cholesky succeeds) within `tol` asymmetry.
pub(crate) fn check_spd(m: &DMatrix<f64>, name: &str, tol: f64) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Shape(format!("{name} must be a non-empty square matrix")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::ParameterDomain(format!("{name} has non-finite entries")));
    }
    let asym = (m - m.transpose()).abs().max();
    if asym > tol * m.abs().max().max(1.0) {
        return Err(Error::ParameterDomain(format!("{name} is not symmetric (max asymmetry {asym:e})")));
    }
    let min_eig = symmetrize(m).symmetric_eigenvalues().min();
    if !(min_eig > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "{name} is not positive definite (smallest eigenvalue {min_eig:e})"
        )));
    }
    Ok(())
}

/// Clamps eigenvalues of a symmetric matrix from below.
pub(crate) fn floor_eigenvalues(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let eig = symmetrize(m).symmetric_eigen();
    if eig.eigenvalues.min() >= floor {
        return symmetrize(m);
    }
    let vals = eig.eigenvalues.map(|v| v.max(floor));
    let q = &eig.eigenvectors;
    symmetrize(&(q * DMatrix::from_diagonal(&vals) * q.transpose()))
}

pub(crate) fn ln_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::ParameterDomain("matrix is not positive definite".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
}

pub(crate) fn inverse_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::ParameterDomain("matrix is not positive definite".into()))
}
