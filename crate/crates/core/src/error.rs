use thiserror::Error;

/// Errors produced by set construction and the solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("entry {index} is not finite ({value})")]
    NonFiniteEntry { index: usize, value: f64 },

    #[error("symmetric matrix needs {expected} entries, got {got}")]
    BadMatrixLength { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error(
        "sparse box is infeasible: {forced} components exclude zero but the cardinality bound is {kappa}"
    )]
    InfeasibleSparseBox { forced: usize, kappa: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigenNonConvergence { sweeps: usize, off_norm: f64 },

    #[error("objective returned a non-finite {what} at iteration j={j}")]
    NonFiniteObjective { what: &'static str, j: usize },

    #[error("matrix is not numerically rank one (rank {rank})")]
    NotRankOne { rank: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
