//! Minimum information Markov models.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
mod clock;
pub mod error;
pub mod gaussian;
pub mod mcle;
pub mod numeric;
pub mod oracle;
pub mod params;
pub mod ple;
pub mod series;
pub mod spec;
pub mod stats;
pub mod verify;

pub use error::{Error, ErrorKind, Result};
pub use series::{ColumnKind, TimeSeries};
pub use spec::{kron_spec, DependenceSpec, Factor, MonomialTerm};
pub use stats::{delta_statistic_swap, eval_h, total_statistic, Permutation, SwapEvaluator};
