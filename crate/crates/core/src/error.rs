use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not Hermitian (adjoint distance {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("time {t} lies outside the interval [{lo}, {hi}]")]
    OutsideInterval { t: f64, lo: f64, hi: f64 },

    #[error("generator is not functionally commutative (commutator norm {norm:e} at t={t}, s={s})")]
    NotCommutative { norm: f64, t: f64, s: f64 },

    #[error("matrices {i} and {j} do not commute (commutator norm {norm:e})")]
    NonCommutingParts { i: usize, j: usize, norm: f64 },

    #[error("reconstruction residual {residual:e} at t={t} exceeds {tol:e}")]
    Residual { t: f64, residual: f64, tol: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unphysical state at t={t}: {detail}")]
    Unphysical { t: f64, detail: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
