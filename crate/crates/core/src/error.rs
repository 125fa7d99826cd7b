use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QslError {
    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("state norm overflowed at t = {time:e}")]
    Overflow { time: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("trajectory is discontinuous between samples {index} and {next} (overlap {overlap:.6})", next = .index + 1)]
    Discontinuous { index: usize, overlap: f64 },

    #[error("path length S = {s:e} is below geodesic distance S0 = {s0:e}; grid too coarse")]
    GridTooCoarse { s: f64, s0: f64 },

    #[error("negative speed radicand {value:e}")]
    NegativeRadicand { value: f64 },

    #[error("{quantity} has imaginary residue {residue:e}")]
    ImaginaryResidue {
        quantity: &'static str,
        residue: f64,
    },

    #[error("invalid density matrix at sample {index}: {reason}")]
    InvalidDensity { index: usize, reason: String },

    #[error("ambiguous eigenbranch matching at sample {index}")]
    AmbiguousBranch { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, QslError>;
