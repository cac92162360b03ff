//! Gaussian autoregressive ground truth.
//!
//! Classical AR/VAR parameters `(φ, σ²)`, `({A_k}, Σ)` and their minimum
//! information counterparts `(θ, τ²)`, `(Θ, B)`: `θ` weights the dependence
//! function and `τ²` / `B` is the stationary (co)variance. The two
//! parametrizations are in one-to-one correspondence; the forward maps are
//! closed form, the inverses are solved numerically where no closed form is
//! known.

mod ar;
mod kernel;
mod linalg;
mod simulate;
mod var;

pub use ar::{
    ar1_to_mininfo, ar2_to_mininfo, ar_from_partial_autocorrelations, ard_to_mininfo,
    autocovariances, mininfo_to_ar, mininfo_to_ar1, mininfo_to_ar2, mininfo_to_ard,
    ClassicalArParams, MinInfoArParams,
};
pub use kernel::{ar1_fisher_info, construct_e_kernel, divergence_rate, EKernel, GaussianKernel};
pub use simulate::{simulate_ar, simulate_var, MIN_BURN_IN_ZERO_INIT};
pub use var::{
    mininfo_to_var1, mininfo_to_var1_with, stationary_covariance, var1_to_mininfo,
    ClassicalVarParams, MinInfoVarParams, RiccatiOptions,
};

