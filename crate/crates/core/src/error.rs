//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension n = {0} (supported: 1, 2, 3)")]
    UnsupportedDimension(usize),

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error(
        "hyperbolicity violated at (s = {s}): eigenvalue imaginary part {imag:e} exceeds tolerance"
    )]
    HyperbolicityViolated { s: f64, imag: f64 },

    #[error("gap failure at (s = {s}): root separation {gap:e} below tolerance")]
    GapFailure { s: f64, gap: f64 },

    #[error("eigenvalue iteration failed to converge")]
    EigenNonConvergence,

    #[error("diagonalization failure: all adjugate rows below threshold (defective symbol?)")]
    DiagonalizationFailure,

    #[error("degenerate diagonalizer: |det N| = {det:e} below floor {floor:e}")]
    DegenerateDiagonalizer { det: f64, floor: f64 },

    #[error("branch discontinuity at time index {index}: alignment correlation {correlation:.3} < {min:.3} (grid too coarse)")]
    BranchDiscontinuity {
        index: usize,
        correlation: f64,
        min: f64,
    },

    #[error(
        "Picard truncation failure: term {terms} norm {last_norm:e} still above tolerance {tol:e}"
    )]
    PicardTruncation {
        terms: usize,
        last_norm: f64,
        tol: f64,
    },

    #[error("parameter range exceeded (s > delta): s = {s} outside [0, {delta}] at t = {t}")]
    ParameterRangeExceeded { s: f64, delta: f64, t: f64 },

    #[error("no contraction — data too large or delta too small ({iters} iterations, last delta {last_delta:e})")]
    NoContraction { iters: usize, last_delta: f64 },

    #[error("condition violated for {which} at omega index {omega_index}: value {value:e}")]
    ConditionViolated {
        which: &'static str,
        omega_index: usize,
        value: f64,
    },

    #[error("grid mismatch between field and tables")]
    GridMismatch,

    #[error("missing asymptotic tables: {0}")]
    MissingTables(&'static str),

    #[error("physical form unavailable for data family '{0}'")]
    PhysicalFormUnavailable(String),

    #[error("signal too small: oscillatory integral below noise floor {floor:e}")]
    SignalTooSmall { floor: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
