use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid field data: {0}")]
    InvalidField(String),

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("enumeration in real dimension {dim} exceeds the guard of {max}")]
    DimensionGuard { dim: usize, max: usize },

    #[error("theta sum not certifiable: {0}")]
    ThetaNotCertified(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("invalid nesting: {0}")]
    InvalidNesting(String),

    #[error("zero fading coefficient at index {0}")]
    ZeroFading(usize),

    #[error("sampler refused: {0}")]
    SamplerRefused(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("design refused: {0}")]
    DesignRefused(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
