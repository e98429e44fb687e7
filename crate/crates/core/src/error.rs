use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),
    #[error("unsupported datatype code {0}")]
    UnsupportedDtype(i16),
    #[error("truncated file: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("degenerate intensity range [{min}, {max}]")]
    DegenerateRange { min: f64, max: f64 },
    #[error("axis {axis} has odd length {len}")]
    OddDimension { axis: usize, len: usize },
    #[error("patch grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid volume: {0}")]
    InvalidVolume(String),
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimMismatch([usize; 3], [usize; 3]),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("missing gradient for parameter `{0}`")]
    MissingGradient(String),
    #[error("non-finite loss `{name}` at iteration {iteration}")]
    NonFiniteLoss { name: &'static str, iteration: u64 },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid config: {0}")]
    Config(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
