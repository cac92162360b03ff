use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure category, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Timeout,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("insufficient data: need more than {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("swap positions ({s1}, {s2}) outside the swappable interior [{lo}, {hi})")]
    BoundaryViolation { s1: usize, s2: usize, lo: usize, hi: usize },

    #[error("column {0} has zero variance and cannot be standardized")]
    DegenerateScale(usize),

    #[error("invalid dependence spec: {0}")]
    InvalidSpec(String),

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("non-stationary parameters: {0}")]
    Stationarity(String),

    #[error("parameter outside its domain: {0}")]
    ParameterDomain(String),

    #[error("no solution found: {0}")]
    NoSolution(String),

    #[error("interior has {interior} swappable positions, need at least 2")]
    InsufficientInterior { interior: usize },

    #[error("ill-conditioned information matrix: {0}")]
    IllConditioned(String),

    #[error("enumeration budget exceeded: {interior} interior points > {max}")]
    BudgetExceeded { interior: usize, max: usize },

    #[error("conditional likelihood is unbounded along direction {direction:?}")]
    Unbounded { direction: Vec<f64> },

    #[error("rank-deficient design matrix: {0}")]
    Rank(String),

    #[error("time limit of {0:.1} s exceeded")]
    Timeout(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Stationarity(_) | NoSolution(_) | IllConditioned(_) | Unbounded { .. } | Rank(_)
            | Internal(_) => ErrorKind::Numerical,
            Timeout(_) => ErrorKind::Timeout,
            Io(_) => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }
}
