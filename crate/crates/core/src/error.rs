use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coefficient model: {0}")]
    InvalidModel(String),

    #[error("invalid limit process: {0}")]
    InvalidLimit(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("function is numerically zero on the scan grid (max |f| = {max_abs:e})")]
    DegenerateInput { max_abs: f64 },

    #[error("companion oracle unreliable: root at modulus {modulus} near the unit circle failed to polish")]
    OracleUnreliable { modulus: f64 },

    #[error("angle is a rational multiple of 2π with denominator {q} above the cap {q_max}")]
    RationalOverflow { q: u64, q_max: u64 },

    #[error("insufficient samples: {got} < {need}")]
    InsufficientSamples { got: u64, need: u64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{discarded} of {replicas} replicas discarded, above the 1% limit")]
    TooManyDiscards { discarded: u64, replicas: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
