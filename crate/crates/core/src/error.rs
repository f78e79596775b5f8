use thiserror::Error;

/// Errors raised anywhere in the hiding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A PGM file could not be decoded.
    #[error("pgm format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    /// Caller-supplied parameters are out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The image has no net room to vacate at any threshold.
    #[error("no room: best net capacity is {best} bits")]
    NoRoom { best: i64 },

    /// The payload does not fit.
    #[error("payload of {requested} bits exceeds capacity of {available} bits")]
    Capacity { requested: usize, available: usize },

    /// Embedded side information failed validation (wrong key, tampering, bad seed).
    #[error("corrupt carrier: {0}")]
    Corrupt(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
