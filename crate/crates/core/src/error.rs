use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the region where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("reduction to the fundamental domain did not terminate after {iterations} steps (tau = {x} + {y}i)")]
    ReductionFailed { x: f64, y: f64, iterations: usize },

    /// The index set handed to the triple partition is not closed under the
    /// rotation about the deep hole.
    #[error("index set is not closed under rotation: ({k}, {l}) maps outside the set")]
    Partition { k: i64, l: i64 },

    #[error("evaluation point ({k}, {l}) lies within {tolerance} of the singularity at (1/3, 1/3)")]
    Singularity { k: f64, l: f64, tolerance: f64 },

    #[error("invalid kernel spec: {0}")]
    KernelSpec(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
