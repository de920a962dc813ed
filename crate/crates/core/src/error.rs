use thiserror::Error;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("{context}: matrix must be square, got {rows}x{cols}")]
    NotSquare {
        context: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix must have at least one row and one column")]
    Empty,

    #[error("eigenvalue iteration failed to converge after {iterations} sweeps (window {lo}..={hi})")]
    EigenFailure {
        iterations: usize,
        lo: usize,
        hi: usize,
    },

    #[error("matrix is singular to working precision (reciprocal condition estimate {rcond:e})")]
    Singular { rcond: f64 },

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error("not a permutation: {0}")]
    NotPermutation(String),

    #[error("unsupported operator for {operation}: {reason}")]
    UnsupportedOperator {
        operation: &'static str,
        reason: String,
    },

    #[error("input is not a Stein solution: relative residual {residual:e} exceeds {tol:e}")]
    NotASteinSolution { residual: f64, tol: f64 },

    #[error("{method} iteration diverged after {iterations} steps (rho = {rho}, last update {last_update:e})")]
    Divergence {
        method: &'static str,
        iterations: usize,
        rho: f64,
        last_update: f64,
    },

    #[error("linear system is inconsistent: least-squares residual {residual:e}")]
    Inconsistent { residual: f64 },

    #[error("operator family is not homogeneous period-{period}: {reason}")]
    NotHomogeneous { period: usize, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
