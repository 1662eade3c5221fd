use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Per-edge clocks only move forward; a query before the last one for
    /// the same edge (or before a rollup horizon) breaks the contract.
    #[error("time regression: query at t={t} but clock already at {clock}")]
    TimeRegression { t: f64, clock: f64 },

    #[error("unknown vertex {0} for this graph")]
    UnknownVertex(String),

    #[error("vertex/graph kind mismatch: {0}")]
    KindMismatch(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evolving set must be nonempty")]
    EmptySet,

    #[error("evolving set must be a proper subset")]
    FullSet,

    #[error("kernel requires a regular finite graph or an explicit host degree")]
    IrregularGraph,

    #[error("malformed Diaconis–Fill state: walker not in set")]
    WalkerOutsideSet,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
