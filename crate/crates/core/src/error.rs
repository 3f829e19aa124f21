//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by state construction, solvers and protocol simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: operator of dim {dim} cannot be split as {dim_a}x{dim_b}")]
    ShapeMismatch { dim: usize, dim_a: usize, dim_b: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("target {index} is not dominated by 2^lambda sigma (excess eigenvalue {excess:.3e})")]
    DominationViolated { index: usize, excess: f64 },

    #[error("simulated dimension {dim} exceeds the cap {cap}")]
    DimensionBlowup { dim: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
