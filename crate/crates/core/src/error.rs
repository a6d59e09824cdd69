use crate::model::Axis;

/// Errors produced across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A row of an edge-list or table could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty dataset")]
    EmptyDataset,

    /// A numeric argument is outside its accepted range.
    #[error("invalid value: {0}")]
    Value(String),

    /// A combinatorial function was called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A vertex has no cluster in a supplied partition.
    #[error("{axis} vertex {vertex} is not covered by the partition")]
    Coverage { axis: Axis, vertex: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("time intervals {0} and {1} are not adjacent")]
    NonAdjacentTime(usize, usize),

    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),

    /// The model and the data set disagree on counts, degrees or universes.
    #[error("model is not compatible with the data: {0}")]
    Incompatible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
