use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular-value pair mismatch at index {index}: {first} vs {second}")]
    PairMismatch {
        index: usize,
        first: f64,
        second: f64,
    },

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("unknown filter `{0}`")]
    UnknownFilter(String),

    #[error("expected {expected} channel(s), got {actual}")]
    ChannelCount { expected: u8, actual: u8 },

    #[error("input file not found: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingInput(_) | Error::DimensionMismatch(_) | Error::ChannelCount { .. } => 3,
            Error::Io { .. } | Error::Image { .. } => 2,
            Error::Config(_) | Error::InvalidParameter(_) | Error::UnknownFilter(_) => 4,
            Error::NonFinite(_) | Error::PairMismatch { .. } | Error::Solve(_) => 1,
        }
    }
}
