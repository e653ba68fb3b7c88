//! Shared error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration budget exceeded: {count} candidates > budget {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("rank-deficient basis: rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("integer overflow in exact lattice arithmetic")]
    IntegerOverflow,

    #[error("subspace not orthogonal to the frequency: angle defect {defect:.3e} > {tol:.3e}")]
    NotOrthogonal { defect: f64, tol: f64 },

    #[error("frequency map vanishes on the domain: min |omega| = {min_norm:.3e}")]
    FrequencyVanishes { min_norm: f64 },

    #[error("reality constraint violated for harmonic k = {k:?}")]
    RealityViolated { k: Vec<i64> },

    #[error("implicit midpoint iteration failed to converge (residual {residual:.3e} after {iters} iterations); reduce the step size")]
    MidpointDiverged { residual: f64, iters: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
