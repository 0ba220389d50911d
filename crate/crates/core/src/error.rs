use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument {value} of {what} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{what} did not converge (residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("Newton iteration failed at t = {t} after {iterations} iterations (residual {residual:e})")]
    NewtonNonConvergence {
        t: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("state left its admissible range at t = {t} (value {value}); try a smaller dt")]
    Stability { t: f64, value: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
