use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at pixel (row {row}, col {col}), channel {channel}")]
    NonFinite {
        row: usize,
        col: usize,
        channel: usize,
    },

    #[error("value {value} at pixel (row {row}, col {col}), channel {channel} is outside [0, 1]")]
    OutOfRange {
        row: usize,
        col: usize,
        channel: usize,
        value: f64,
    },

    #[error("buffer of length {len} does not hold a {height}x{width}x3 image")]
    BadBuffer {
        height: usize,
        width: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("pyramid underflow at level {level}: {height}x{width} is smaller than {min_side}x{min_side}")]
    PyramidUnderflow {
        level: usize,
        height: usize,
        width: usize,
        min_side: usize,
    },

    #[error("image {height}x{width} is smaller than the {side}x{side} kernel")]
    KernelTooLarge {
        height: usize,
        width: usize,
        side: usize,
    },

    #[error("sample vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("exhaustive matching refused for n = {0} (limit 10)")]
    OracleTooLarge(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("optimization diverged at step {step}")]
    Diverged { step: usize },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by reading or decoding external data.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
                | Error::Image { .. }
                | Error::UnsupportedFormat(_)
                | Error::Format(_)
        )
    }
}
