use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("insufficient precision: need {needed} binary digits, point has {available}")]
    InsufficientPrecision { needed: u32, available: u32 },

    #[error("precision mismatch: {left} vs {right}")]
    PrecisionMismatch { left: u32, right: u32 },

    #[error("enumeration too large: {what} needs {bits} bits, cap is {cap}")]
    EnumerationTooLarge { what: &'static str, bits: u32, cap: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("diagonal must vanish (entry {index} is {value})")]
    NonzeroDiagonal { index: usize, value: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("entry ({row}, {col}) = {value} is not a sign (+1 or -1)")]
    NotASign { row: usize, col: usize, value: f64 },

    #[error("quadrature did not converge: estimate {estimate}, achieved error {achieved:e}")]
    QuadratureFailed { estimate: f64, achieved: f64 },

    #[error("bisection did not converge after {iterations} iterations (bracket [{lo}, {hi}])")]
    BisectionFailed { iterations: u32, lo: f64, hi: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl ChaosError {
    /// True for errors that come from a configured size limit rather than bad input.
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, ChaosError::EnumerationTooLarge { .. })
    }
}

pub type Result<T> = std::result::Result<T, ChaosError>;
