use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The coverage target cannot be met by any plan; carries the counting
    /// argument that proves it.
    #[error("provably infeasible: {0}")]
    ProvablyInfeasible(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("instance too large for exhaustive enumeration: {size} > {limit}")]
    OracleLimit { size: usize, limit: usize },

    #[error("scenario error at {pointer}: {message}")]
    Scenario { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
