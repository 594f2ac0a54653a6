use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("box has zero volume and cannot be split")]
    ZeroVolume,

    #[error("empty point subset")]
    EmptySubset,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing ground truth: {0}")]
    MissingGroundTruth(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
