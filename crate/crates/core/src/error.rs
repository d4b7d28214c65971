use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("tree depth {n} exceeds the supported maximum {max}")]
    DepthTooLarge { n: usize, max: usize },
    #[error("index {index} out of range for N = {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid row-merge pair ({info}, {frozen}): {reason}")]
    InvalidMerge {
        info: usize,
        frozen: usize,
        reason: &'static str,
    },
    #[error("invalid pre-transform: {0}")]
    InvalidTransform(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("code dimension {k} exceeds the brute-force cap {cap}")]
    BruteForceCap { k: usize, cap: usize },
    #[error("count overflowed 128 bits")]
    CountOverflow,
    #[error("design failure: ran out of channels after unfreezing {kappa} rows")]
    DesignFailure { kappa: usize },
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
