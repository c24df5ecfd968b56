use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-positive or out-of-range parameter: {0}")]
    NonPositiveParameter(String),

    #[error("{which} shares sum to {sum}, expected 1")]
    ShareSumMismatch { which: &'static str, sum: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("state component {index} = {value} outside [0, {upper}]")]
    StateOutOfBounds { index: usize, value: f64, upper: f64 },

    #[error("log of non-positive availability at cell {0}")]
    DomainError(usize),

    #[error("integrator step size underflow at t = {t} (step {step})")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("steady-state solver did not converge after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("N = {n} listings is smaller than the {cells} positive-mass cells")]
    NTooSmall { n: usize, cells: usize },

    #[error("degenerate arm: {0}")]
    DegenerateArm(String),

    #[error("need at least 2 replications, got {0}")]
    TooFewReplications(usize),

    #[error("replication {index}: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
