use thiserror::Error;

/// Errors produced by the transform, learning, codec and evaluation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid edge weights: {0}")]
    InvalidWeights(String),

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("template unavailable for block at ({row}, {col})")]
    TemplateUnavailable { row: usize, col: usize },

    #[error("cluster bank holds {initialized} of {k} clusters")]
    BankNotInitialized { initialized: usize, k: usize },

    #[error("cluster has {count} samples, GBT needs {required}")]
    GbtUnavailable { count: usize, required: usize },

    #[error("prediction mode {mode:?} unavailable at ({row}, {col})")]
    ModeUnavailable {
        mode: crate::codec::PredMode,
        row: usize,
        col: usize,
    },

    #[error("corrupt stream at bit {bit_offset}: {reason}")]
    CorruptStream { bit_offset: u64, reason: String },

    #[error("undefined power spectrum: all coefficients are zero")]
    UndefinedSpectrum,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("image format: {0}")]
    ImageFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn corrupt(bit_offset: u64, reason: impl Into<String>) -> Self {
        Error::CorruptStream {
            bit_offset,
            reason: reason.into(),
        }
    }
}
