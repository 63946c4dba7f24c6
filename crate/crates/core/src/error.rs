use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid circuit: {0}")]
    Validation(String),

    #[error("malformed circuit document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("{n} qubits exceeds the simulator cap of {cap}")]
    ResourceLimit { n: usize, cap: usize },

    #[error("state dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("statistic undefined: {0}")]
    Undefined(String),

    #[error("no robust/fragile transition on any grid point")]
    NoTransition,

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
