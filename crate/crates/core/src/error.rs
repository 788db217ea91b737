use thiserror::Error;

/// Errors raised anywhere in the separability toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("iteration budget exhausted in {0}")]
    NoConvergence(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("prescribed rows are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("no free row left to fix the orientation of an orthogonal matrix")]
    Orientation,

    #[error("dimension {0} is too small, need at least 2")]
    DimensionTooSmall(usize),

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("state does not have full local ranks ({n}, {m})")]
    NotFullRank { n: usize, m: usize },

    #[error("bad cardinality r={r} for n={n}, need 1 <= r < n")]
    BadCardinality { n: usize, r: usize },

    #[error("triple sets are capped at n <= {cap}, got {n}")]
    TripleCapExceeded { n: usize, cap: usize },

    #[error("sequence lengths differ")]
    LengthMismatch,

    #[error("sequence is not sorted in non-increasing order or has negative entries")]
    NotSorted,

    #[error("state is not in normal form (local Bloch norms {0:.3e})")]
    NotNormalForm(f64),

    #[error("D_tau = X D_alpha Q1 Q2^T D_beta Y^T violated (residual {residual:.3e}, singular-value mismatch {singular_mismatch:.3e})")]
    FactorIdentityViolated { residual: f64, singular_mismatch: f64 },

    #[error("scaled Ky Fan sum {0} exceeds 1")]
    BoundExceeded(f64),

    #[error("probability fixed point did not converge after {iterations} iterations (residual {residual:.3e})")]
    FixedPointDiverged { iterations: usize, residual: f64 },

    #[error("pure simplex search failed for N={dim} (best negative-eigenvalue residual {residual:.3e})")]
    SearchFailed { dim: usize, residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("parameter {0} outside the positivity range")]
    OutOfPositivityRange(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
