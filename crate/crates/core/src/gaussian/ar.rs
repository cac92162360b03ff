use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AR(d) coefficients `φ` and noise variance `σ²` of a stationary process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalArParams {
    phi: Vec<f64>,
    sigma2: f64,
}

impl ClassicalArParams {
    /// Validates `σ² > 0` and stationarity (all characteristic roots outside the unit circle).
    pub fn new(phi: Vec<f64>, sigma2: f64) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::ParameterDomain("AR order must be at least 1".into()));
        }
        if phi.iter().any(|v| !v.is_finite()) || !sigma2.is_finite() {
            return Err(Error::ParameterDomain("non-finite AR parameters".into()));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::ParameterDomain(format!("noise variance {sigma2} must be positive")));
        }
        if !is_stationary(&phi) {
            return Err(Error::Stationarity(format!("AR coefficients {phi:?} have a root on or inside the unit circle")));
        }
        Ok(Self { phi, sigma2 })
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    /// Stationary variance.
    pub fn stationary_variance(&self) -> f64 {
        autocovariances(&self.phi, self.sigma2, 0)[0]
    }
}

/// Dependence parameter `θ` and stationary variance `τ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinInfoArParams {
    theta: Vec<f64>,
    tau2: f64,
}

impl MinInfoArParams {
    pub fn new(theta: Vec<f64>, tau2: f64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::ParameterDomain("θ must have at least one entry".into()));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::ParameterDomain("θ has non-finite entries".into()));
        }
        if !(tau2 > 0.0) || !tau2.is_finite() {
            return Err(Error::ParameterDomain(format!("stationary variance {tau2} must be positive")));
        }
        Ok(Self { theta, tau2 })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn order(&self) -> usize {
        self.theta.len()
    }
}

fn is_stationary(phi: &[f64]) -> bool {
    match *phi {
        [a] => a.abs() < 1.0,
        [a, b] => 1.0 + b > 0.0 && 1.0 - a - b > 0.0 && 1.0 + a - b > 0.0,
        _ => partial_autocorrelations(phi).is_some(),
    }
}

/// Inverse Durbin–Levinson recursion. `None` unless every partial
/// autocorrelation lies strictly inside `(−1, 1)`, which is exactly
/// stationarity.
fn partial_autocorrelations(phi: &[f64]) -> Option<Vec<f64>> {
    if phi.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut cur = phi.to_vec();
    let mut pacf = vec![0.0; phi.len()];
    for k in (0..phi.len()).rev() {
        let r = cur[k];
        if !(r.abs() < 1.0) {
            return None;
        }
        pacf[k] = r;
        let denom = 1.0 - r * r;
        cur = (0..k).map(|j| (cur[j] + r * cur[k - 1 - j]) / denom).collect();
    }
    Some(pacf)
}

/// Autocovariances `γ_0, …, γ_m` of a stationary AR process, with
/// `m = max(extra, d)` (Yule–Walker).
pub fn autocovariances(phi: &[f64], sigma2: f64, extra: usize) -> Vec<f64> {
    let d = phi.len();
    let mut m = DMatrix::<f64>::zeros(d + 1, d + 1);
    for k in 0..=d {
        m[(k, k)] += 1.0;
        for (i, &f) in phi.iter().enumerate() {
            let lag = (k as isize - (i as isize + 1)).unsigned_abs();
            m[(k, lag)] -= f;
        }
    }
    let mut rhs = DVector::zeros(d + 1);
    rhs[0] = sigma2;
    let sol = m.lu().solve(&rhs).unwrap_or_else(|| DVector::from_element(d + 1, f64::NAN));
    let mut gamma: Vec<f64> = sol.iter().copied().collect();
    for k in d + 1..=extra.max(d) {
        let next = phi.iter().enumerate().map(|(i, f)| f * gamma[k - i - 1]).sum();
        gamma.push(next);
    }
    gamma
}

/// `θ = φ/σ²`, `τ² = σ²/(1−φ²)`.
pub fn ar1_to_mininfo(params: &ClassicalArParams) -> Result<MinInfoArParams> {
    let [phi] = params.phi() else {
        return Err(Error::ParameterDomain(format!("expected AR(1), got AR({})", params.order())));
    };
    let s2 = params.sigma2();
    MinInfoArParams::new(vec![phi / s2], s2 / (1.0 - phi * phi))
}

/// Closed-form inverse of [`ar1_to_mininfo`].
pub fn mininfo_to_ar1(params: &MinInfoArParams) -> Result<ClassicalArParams> {
    let [theta] = params.theta() else {
        return Err(Error::ParameterDomain(format!("expected order 1, got {}", params.order())));
    };
    let tau2 = params.tau2();
    let denom = 1.0 + (1.0 + 4.0 * theta * theta * tau2 * tau2).sqrt();
    ClassicalArParams::new(vec![2.0 * theta * tau2 / denom], 2.0 * tau2 / denom)
}

pub fn ar2_to_mininfo(params: &ClassicalArParams) -> Result<MinInfoArParams> {
    let [p1, p2] = params.phi() else {
        return Err(Error::ParameterDomain(format!("expected AR(2), got AR({})", params.order())));
    };
    let s2 = params.sigma2();
    let tau2 = (1.0 - p2) * s2 / ((1.0 + p2) * (1.0 - p1 - p2) * (1.0 + p1 - p2));
    MinInfoArParams::new(vec![p1 * (1.0 - p2) / s2, p2 / s2], tau2)
}

/// `1/τ²` as a function of `t = σ²` along the inverse path.
fn ar2_inverse_variance(t: f64, th1: f64, th2: f64) -> f64 {
    let u = 1.0 - th2 * t;
    (1.0 - th2 * th2 * t * t) / t - (1.0 + th2 * t) * th1 * th1 * t / (u * u * u)
}

/// Smallest `t > 0` at which `(φ₁(t), φ₂(t)) = (θ₁t/(1−θ₂t), θ₂t)` leaves the
/// stationarity triangle (or hits the pole `t = 1/θ₂`).
fn ar2_path_exit(th1: f64, th2: f64) -> f64 {
    let mut exit = f64::INFINITY;
    let mut consider = |t: f64| {
        if t > 0.0 && t.is_finite() {
            exit = exit.min(t);
        }
    };
    if th2 != 0.0 {
        consider(-1.0 / th2); // 1 + φ₂ = 0
        consider(1.0 / th2); // pole of φ₁
    }
    // (1 − θ₂t)² ∓ θ₁t = 0 are the sides 1 − φ₁ − φ₂ = 0 and 1 + φ₁ − φ₂ = 0.
    for b in [2.0 * th2 + th1, 2.0 * th2 - th1] {
        let a = th2 * th2;
        if a == 0.0 {
            if b != 0.0 {
                consider(1.0 / b);
            }
            continue;
        }
        let disc = b * b - 4.0 * a;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            consider((b - sq) / (2.0 * a));
            consider((b + sq) / (2.0 * a));
        }
    }
    exit
}

/// Inverse of [`ar2_to_mininfo`] by bisection on the strictly decreasing map
/// `σ² ↦ 1/τ²(σ²)` over the stationary part of the path.
pub fn mininfo_to_ar2(params: &MinInfoArParams) -> Result<ClassicalArParams> {
    let [th1, th2] = params.theta() else {
        return Err(Error::ParameterDomain(format!("expected order 2, got {}", params.order())));
    };
    let (th1, th2) = (*th1, *th2);
    let target = 1.0 / params.tau2();
    let exit = ar2_path_exit(th1, th2);
    let t = if exit.is_infinite() {
        params.tau2()
    } else {
        let (mut lo, mut hi) = (0.0_f64, exit);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if ar2_inverse_variance(mid, th1, th2) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let resid = (ar2_inverse_variance(t, th1, th2) - target).abs();
        if !(t > 0.0 && t < exit) || !(resid <= 1e-6 * target.max(1.0)) {
            return Err(Error::Internal(format!(
                "AR(2) inverse bisection did not bracket a root (t = {t}, residual {resid:e})"
            )));
        }
        t
    };
    ClassicalArParams::new(vec![th1 * t / (1.0 - th2 * t), th2 * t], t)
}

/// `θ_i = (φ_i − Σ_{k−j=i} φ_j φ_k)/σ²` and the Yule–Walker `τ²`.
pub fn ard_to_mininfo(params: &ClassicalArParams) -> Result<MinInfoArParams> {
    MinInfoArParams::new(ard_theta(params.phi(), params.sigma2()), params.stationary_variance())
}

fn ard_theta(phi: &[f64], sigma2: f64) -> Vec<f64> {
    let d = phi.len();
    (1..=d)
        .map(|i| {
            let cross: f64 = (1..=d - i).map(|j| phi[j - 1] * phi[j + i - 1]).sum();
            (phi[i - 1] - cross) / sigma2
        })
        .collect()
}

/// Residual of the forward map for unknown `φ` with `σ²` eliminated via
/// `σ² = τ² / γ₀(φ, 1)`. `None` when `φ` is not stationary.
fn ard_residual(phi: &[f64], theta: &[f64], tau2: f64) -> Option<(Vec<f64>, f64)> {
    if !is_stationary(phi) {
        return None;
    }
    let g0 = autocovariances(phi, 1.0, 0)[0];
    if !(g0 > 0.0) || !g0.is_finite() {
        return None;
    }
    let sigma2 = tau2 / g0;
    let scaled = ard_theta(phi, 1.0);
    let r = scaled.iter().zip(theta).map(|(s, th)| s - th * sigma2).collect();
    Some((r, sigma2))
}

fn newton_ard(theta: &[f64], tau2: f64, mut phi: Vec<f64>) -> Option<Vec<f64>> {
    let d = phi.len();
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (mut r, _) = ard_residual(&phi, theta, tau2)?;
    for _ in 0..200 {
        let rn = norm(&r);
        if rn < 1e-14 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(d, d);
        for j in 0..d {
            let h = 1e-7 * phi[j].abs().max(1e-3);
            let mut up = phi.clone();
            let mut dn = phi.clone();
            up[j] += h;
            dn[j] -= h;
            let (ru, _) = ard_residual(&up, theta, tau2)?;
            let (rd, _) = ard_residual(&dn, theta, tau2)?;
            for i in 0..d {
                jac[(i, j)] = (ru[i] - rd[i]) / (2.0 * h);
            }
        }
        let step = jac.lu().solve(&DVector::from_vec(r.iter().map(|v| -v).collect()))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-10 {
            let cand: Vec<f64> = phi.iter().zip(step.iter()).map(|(p, s)| p + lambda * s).collect();
            if let Some((rc, _)) = ard_residual(&cand, theta, tau2) {
                if norm(&rc) < rn {
                    phi = cand;
                    r = rc;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some(phi)
}

/// Numerical inverse of [`ard_to_mininfo`] by damped Newton with
/// continuation in `θ`. Best effort: fails with
/// [`Error::NoSolution`] when no stationary solution with residual below
/// `1e-9` is found, which does not prove that none exists.
pub fn mininfo_to_ard(params: &MinInfoArParams) -> Result<ClassicalArParams> {
    let theta = params.theta();
    let tau2 = params.tau2();
    let d = theta.len();
    if theta.iter().all(|&t| t == 0.0) {
        return ClassicalArParams::new(vec![0.0; d], tau2);
    }
    let accept = |phi: &[f64]| -> Option<ClassicalArParams> {
        let (r, sigma2) = ard_residual(phi, theta, tau2)?;
        let scale = theta.iter().map(|t| t.abs()).fold(1.0, f64::max);
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        (rn < 1e-9 * scale).then(|| ClassicalArParams::new(phi.to_vec(), sigma2).ok()).flatten()
    };

    let start: Vec<f64> = theta.iter().map(|t| 0.5 * t * tau2).collect();
    let start = if is_stationary(&start) { start } else { vec![0.0; d] };
    if let Some(p) = newton_ard(theta, tau2, start).as_deref().and_then(accept) {
        return Ok(p);
    }
    for stages in [4usize, 16, 64, 256] {
        let mut phi = vec![0.0; d];
        let mut ok = true;
        for s in 1..=stages {
            let frac = s as f64 / stages as f64;
            let th: Vec<f64> = theta.iter().map(|t| t * frac).collect();
            match newton_ard(&th, tau2, phi.clone()) {
                Some(next) => phi = next,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if let Some(p) = accept(&phi) {
                return Ok(p);
            }
        }
    }
    Err(Error::NoSolution(format!("Newton did not converge for θ = {theta:?}, τ² = {tau2}")))
}

/// Classical parameters for any order: closed forms for `d ≤ 2`, Newton otherwise.
pub fn mininfo_to_ar(params: &MinInfoArParams) -> Result<ClassicalArParams> {
    match params.order() {
        1 => mininfo_to_ar1(params),
        2 => mininfo_to_ar2(params),
        _ => mininfo_to_ard(params),
    }
}

/// Stationary AR coefficients from partial autocorrelations in `(−1, 1)`
/// (Durbin–Levinson). Convenient for drawing random stationary processes.
pub fn ar_from_partial_autocorrelations(pacf: &[f64]) -> Result<Vec<f64>> {
    if pacf.iter().any(|r| !(r.abs() < 1.0)) {
        return Err(Error::ParameterDomain("partial autocorrelations must lie in (-1, 1)".into()));
    }
    let mut phi: Vec<f64> = Vec::with_capacity(pacf.len());
    for (k, &r) in pacf.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi.push(r);
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ar1_table_parameters() {
        let m = ar1_to_mininfo(&ClassicalArParams::new(vec![0.5], 0.5).unwrap()).unwrap();
        assert_eq!(m.theta(), &[1.0]);
        assert!(close(m.tau2(), 2.0 / 3.0, 1e-15));
    }

    #[test]
    fn ar1_inverse_formula() {
        let c = mininfo_to_ar1(&MinInfoArParams::new(vec![1.0], 2.0 / 3.0).unwrap()).unwrap();
        assert!(close(c.phi()[0], 0.5, 1e-15));
        assert!(close(c.sigma2(), 0.5, 1e-15));
    }

    #[test]
    fn independence_case_maps_to_itself() {
        let m = ar1_to_mininfo(&ClassicalArParams::new(vec![0.0], 1.7).unwrap()).unwrap();
        assert_eq!((m.theta()[0], m.tau2()), (0.0, 1.7));
        let c = mininfo_to_ar1(&m).unwrap();
        assert_eq!((c.phi()[0], c.sigma2()), (0.0, 1.7));
        let c2 = mininfo_to_ar2(&MinInfoArParams::new(vec![0.0, 0.0], 1.7).unwrap()).unwrap();
        assert_eq!((c2.phi(), c2.sigma2()), (&[0.0, 0.0][..], 1.7));
    }

    #[test]
    fn ar2_table_parameters() {
        let m = ar2_to_mininfo(&ClassicalArParams::new(vec![0.5, 0.3], 0.5).unwrap()).unwrap();
        assert!(close(m.theta()[0], 0.7, 1e-12));
        assert!(close(m.theta()[1], 0.6, 1e-12));
    }

    #[test]
    fn ar2_outside_triangle_is_non_stationary() {
        assert!(matches!(
            ClassicalArParams::new(vec![0.8, 0.3], 1.0),
            Err(Error::Stationarity(_))
        ));
    }

    #[test]
    fn ard_table_parameters() {
        let m = ard_to_mininfo(&ClassicalArParams::new(vec![0.5, 0.3, 0.1], 0.5).unwrap()).unwrap();
        for (got, want) in m.theta().iter().zip([0.64, 0.5, 0.2]) {
            assert!(close(*got, want, 1e-12), "{got} vs {want}");
        }
    }

    #[test]
    fn ard_reduces_to_low_order_closed_forms() {
        let p1 = ClassicalArParams::new(vec![-0.4], 0.8).unwrap();
        let (a, b) = (ard_to_mininfo(&p1).unwrap(), ar1_to_mininfo(&p1).unwrap());
        assert!(close(a.theta()[0], b.theta()[0], 1e-12) && close(a.tau2(), b.tau2(), 1e-12));
        let p2 = ClassicalArParams::new(vec![0.5, 0.3], 0.5).unwrap();
        let (a, b) = (ard_to_mininfo(&p2).unwrap(), ar2_to_mininfo(&p2).unwrap());
        for k in 0..2 {
            assert!(close(a.theta()[k], b.theta()[k], 1e-12));
        }
        assert!(close(a.tau2(), b.tau2(), 1e-12));
    }

    #[test]
    fn yule_walker_lag_one_autocorrelation() {
        let g = autocovariances(&[0.5, 0.3], 0.5, 1);
        assert!(close(g[1] / g[0], 0.5 / 0.7, 1e-14));
    }

    #[test]
    fn ar2_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let pacf = [rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)];
            let phi = ar_from_partial_autocorrelations(&pacf).unwrap();
            let s2 = rng.random_range(0.1..3.0);
            let c = ClassicalArParams::new(phi, s2).unwrap();
            let back = mininfo_to_ar2(&ar2_to_mininfo(&c).unwrap()).unwrap();
            for k in 0..2 {
                assert!(close(back.phi()[k], c.phi()[k], 1e-10), "{c:?} -> {back:?}");
            }
            assert!(close(back.sigma2(), c.sigma2(), 1e-10));
        }
    }

    #[test]
    fn ar2_inverse_when_lag_side_is_hit_first() {
        // θ₂ < 0 but the path leaves through 1 − φ₁ − φ₂ = 0 long before φ₂ = −1.
        let m = MinInfoArParams::new(vec![10.0, -0.1], 3.0).unwrap();
        let c = mininfo_to_ar2(&m).unwrap();
        let again = ar2_to_mininfo(&c).unwrap();
        assert!(close(again.theta()[0], 10.0, 1e-9));
        assert!(close(again.theta()[1], -0.1, 1e-9));
        assert!(close(again.tau2(), 3.0, 1e-9));
    }

    #[test]
    fn ard_inverse_table_ar3() {
        let c = ClassicalArParams::new(vec![0.5, 0.3, 0.1], 0.5).unwrap();
        let back = mininfo_to_ard(&ard_to_mininfo(&c).unwrap()).unwrap();
        for k in 0..3 {
            assert!(close(back.phi()[k], c.phi()[k], 1e-8));
        }
        assert!(close(back.sigma2(), 0.5, 1e-8));
    }

    #[test]
    fn ard_inverse_zero_theta() {
        let c = mininfo_to_ard(&MinInfoArParams::new(vec![0.0; 3], 2.5).unwrap()).unwrap();
        assert_eq!(c.phi(), &[0.0, 0.0, 0.0]);
        assert_eq!(c.sigma2(), 2.5);
    }

    #[test]
    fn ard_inverse_random_ar3() {
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pacf: Vec<f64> = (0..3).map(|_| rng.random_range(-0.8..0.8)).collect();
            let c = ClassicalArParams::new(ar_from_partial_autocorrelations(&pacf).unwrap(), rng.random_range(0.2..2.0))
                .unwrap();
            let m = ard_to_mininfo(&c).unwrap();
            let back = mininfo_to_ard(&m).unwrap();
            let again = ard_to_mininfo(&back).unwrap();
            for k in 0..3 {
                assert!(close(again.theta()[k], m.theta()[k], 1e-8), "seed {seed}");
            }
            assert!(close(again.tau2(), m.tau2(), 1e-8));
        }
    }

    #[test]
    fn pacf_round_trip() {
        let pacf = [0.3, -0.7, 0.5, 0.9];
        let phi = ar_from_partial_autocorrelations(&pacf).unwrap();
        let back = partial_autocorrelations(&phi).unwrap();
        for (a, b) in back.iter().zip(pacf) {
            assert!(close(*a, b, 1e-12));
        }
        assert!(!is_stationary(&[0.5, 0.3, 0.3]));
        assert!(is_stationary(&[0.5, 0.3, 0.1]));
    }

    #[test]
    fn pacf_map_reproduces_ar2() {
        // φ₂ is the last partial autocorrelation; φ₁ = r₁(1 − r₂).
        let phi = ar_from_partial_autocorrelations(&[0.5, 0.3]).unwrap();
        assert!(close(phi[0], 0.35, 1e-15) && close(phi[1], 0.3, 1e-15));
    }
}
