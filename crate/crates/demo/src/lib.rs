//! WebAssembly bindings for `www/index.html`. Every function returns a JSON
//! string, or an error message.

use mimarkov::gaussian::{
    ard_to_mininfo, construct_e_kernel, divergence_rate, mininfo_to_ar, mininfo_to_ar1, simulate_ar,
    ClassicalArParams, GaussianKernel, MinInfoArParams,
};
use mimarkov::oracle::mle_ols_ar;
use mimarkov::ple::{aic_pic, fit_bipartition, fit_naive, GdConfig};
use mimarkov::DependenceSpec;
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

/// Above this length the demo fits on a random matching of pairs.
const NAIVE_MAX_N: usize = 400;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Classical `(φ, σ²)` to minimum-information `(θ, τ²)` and back.
#[wasm_bindgen]
pub fn transform(phi: Vec<f64>, sigma2: f64) -> Result<String, String> {
    let classical = ClassicalArParams::new(phi, sigma2).map_err(err)?;
    let m = ard_to_mininfo(&classical).map_err(err)?;
    let back = mininfo_to_ar(&m).map_err(err)?;
    Ok(json!({
        "theta": m.theta(),
        "tau2": m.tau2(),
        "phi_back": back.phi(),
        "sigma2_back": back.sigma2(),
    })
    .to_string())
}

/// Simulates AR(d) data and compares the pseudo-likelihood and
/// least-squares estimates of `θ`.
#[wasm_bindgen]
pub fn simulate_fit(phi: Vec<f64>, sigma2: f64, n: usize, seed: u32) -> Result<String, String> {
    let classical = ClassicalArParams::new(phi, sigma2).map_err(err)?;
    let d = classical.order();
    let truth = ard_to_mininfo(&classical).map_err(err)?;
    let series = simulate_ar(&classical, n, 0, u64::from(seed)).map_err(err)?;
    let spec = DependenceSpec::ar(d).map_err(err)?;
    let cfg = GdConfig::default();
    let (method, fit) = if n <= NAIVE_MAX_N {
        ("naive", fit_naive(&spec, &series, &cfg))
    } else {
        ("bipartition", fit_bipartition(&spec, &series, u64::from(seed), &cfg))
    };
    let fit = fit.map_err(err)?;
    let (aic, pic) = aic_pic(fit.log_pl, spec.k(), n, d).map_err(err)?;
    let mle = mle_ols_ar(&series, d).map_err(err)?.1;
    Ok(json!({
        "series": series.as_slice(),
        "theta_true": truth.theta(),
        "ple": { "method": method, "theta": fit.theta_hat, "log_pl": fit.log_pl, "aic": aic, "pic": pic },
        "mle": { "theta": mle.theta() },
    })
    .to_string())
}

/// The three divergence rates among an AR(1) kernel `w` with stationary
/// variance `τ²`, the minimum-information kernel `w*` with `(θ, τ²)`, and the
/// exponential-family kernel `v` with `(θ, D)`.
#[wasm_bindgen]
pub fn pythagorean(theta: f64, tau2: f64, phi_w: f64, d: f64) -> Result<String, String> {
    let star = mininfo_to_ar1(&MinInfoArParams::new(vec![theta], tau2).map_err(err)?).map_err(err)?;
    let w_star = GaussianKernel::from_ar1(&star).map_err(err)?;
    let w = GaussianKernel::scalar(phi_w, tau2 * (1.0 - phi_w * phi_w)).map_err(err)?;
    let v = construct_e_kernel(theta, d).map_err(err)?.kernel;
    let a = divergence_rate(&w, &w_star).map_err(err)?;
    let b = divergence_rate(&w_star, &v).map_err(err)?;
    let c = divergence_rate(&w, &v).map_err(err)?;
    Ok(json!({ "d_w_wstar": a, "d_wstar_v": b, "d_w_v": c, "gap": a + b - c }).to_string())
}
