use serde::Serialize;
use thiserror::Error;

/// Every failure the library can report. Variants carry the offending
/// index or value so callers can name the violated invariant.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", content = "details", rename_all = "snake_case")]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian at ({row}, {col}): deviation {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("diagonal entry {index} is {value} (expected 1)")]
    NotUnitDiagonal { index: usize, value: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("entry {index} is not unimodular (modulus {modulus})")]
    NotUnimodular { index: usize, modulus: f64 },

    #[error("not a permutation of 0..{n}")]
    NotPermutation { n: usize },

    #[error("weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("perturbation direction is numerically zero")]
    DegenerateDirection,

    #[error("perturbation direction is not supported under the support projection (deviation {deviation:e})")]
    OffSupport { deviation: f64 },

    #[error("extreme-point decomposition exceeded depth {depth}")]
    RecursionOverflow { depth: usize },

    #[error("matrix has imaginary part {max_imag:e}; a real matrix is required")]
    NotReal { max_imag: f64 },

    #[error("Clifford dimension 2^{r} exceeds cap {cap}")]
    DimensionCap { r: usize, cap: usize },

    #[error("vector length {found} does not match {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("matrix {index} is not unitary (defect {defect:e})")]
    NotUnitary { index: usize, defect: f64 },

    #[error("block realization needs size {size}, cap is {cap}")]
    SizeOverflow { size: usize, cap: usize },

    #[error("coefficient vector is zero")]
    ZeroVector,

    #[error("input does not match the expected fixture: {reason}")]
    WrongInput { reason: String },

    #[error("dimension {n} is too small (need at least {min})")]
    DimensionTooSmall { n: usize, min: usize },

    #[error("skew part is supported on {size} indices; at most 3 are supported")]
    SupportTooLarge { size: usize },

    #[error("no commuting certificate available: {reason}")]
    NoCertificate { reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed matrix JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
