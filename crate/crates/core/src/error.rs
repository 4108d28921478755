//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime below 2^31")]
    InvalidPrime(u64),

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("bundle class does not match the surface model")]
    ClassModelMismatch,

    #[error("curve does not live on the given surface model")]
    CurveModelMismatch,

    #[error("class is not very ample: {0}")]
    NotVeryAmple(String),

    #[error("infeasible constraint: {0}")]
    InfeasibleConstraint(String),

    #[error("seeded sampling failed to reach full rank after {retries} retries")]
    RankDeficiency { retries: u32 },

    #[error("subsystem has a base point: {0}")]
    BasePoint(String),

    #[error("graded window exceeded: need piece {need}, module built to {built}")]
    WindowExceeded { need: usize, built: usize },

    #[error("window too small: need at least {need}, got {got}")]
    WindowTooSmall { need: usize, got: usize },

    #[error("no regularity level found up to bound {bound}")]
    NotFoundWithinBound { bound: usize },

    #[error("runtime cap exceeded: {0}")]
    RuntimeCapExceeded(String),

    #[error("could not parse {what}: {input}")]
    Parse { what: &'static str, input: String },

    #[error("campaign found {count} counterexample(s); reproduction data dumped to {dump}")]
    CounterexampleFound { count: usize, dump: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn dim(context: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
        }
    }
}
