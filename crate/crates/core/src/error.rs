use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum model: {0}")]
    InvalidModel(String),

    #[error("invalid design parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid arrangement: {0}")]
    InvalidArrangement(String),

    #[error("no arrangement realizes multiplicities")]
    Infeasible,

    #[error("packet index {index} out of range for {packets} packets")]
    PacketOutOfRange { index: usize, packets: usize },

    #[error("bases are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("Woodbury identity check failed: relative gap {0:.3e}")]
    WoodburyMismatch(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("enumeration budget exceeded: more than {budget} arrangements (upper bound about 10^{log10_bound:.1}); use random mode")]
    BudgetExceeded { budget: u64, log10_bound: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
