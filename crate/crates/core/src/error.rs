use thiserror::Error;

/// Errors raised across the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value out of range: {0}")]
    Range(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("Gram matrices differ by {residual:e}")]
    GramMismatch { residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("solver failed after {iterations} iterations (primal {primal_residual:e}, dual {dual_residual:e}, gap {gap:e})")]
    SolverFailure {
        iterations: usize,
        primal_residual: f64,
        dual_residual: f64,
        gap: f64,
    },

    #[error("time limit exceeded after {iterations} iterations")]
    Timeout { iterations: usize },

    #[error("problem is numerically infeasible: {0}")]
    Infeasible(String),

    #[error("extraction failed at step {step}: {reason}")]
    Extraction { step: usize, reason: String },

    #[error("invalid algorithm: {0}")]
    InvalidAlgorithm(String),

    #[error("classification error: {0}")]
    Classification(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
