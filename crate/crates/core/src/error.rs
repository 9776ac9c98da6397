use std::path::PathBuf;

/// Errors raised by the completion library and the workbench.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix is not hollow: diagonal entry {index} is nonzero")]
    NotHollow { index: usize },
    #[error("negative dissimilarity at ({row}, {col})")]
    Negative { row: usize, col: usize },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix has missing entries")]
    MissingEntries,
    #[error("invalid embedding dimension {p} for {n} points")]
    InvalidDimension { p: usize, n: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("edge ({0}, {1}) is not in the tree")]
    EdgeNotInTree(usize, usize),
    #[error("tree edge ({row}, {col}) has weight {tree} but the matrix holds {matrix}")]
    WeightMismatch {
        row: usize,
        col: usize,
        tree: f64,
        matrix: f64,
    },
    #[error("inconsistent bounds at ({row}, {col}): lower {lower} exceeds upper {upper}")]
    InconsistentBounds {
        row: usize,
        col: usize,
        lower: f64,
        upper: f64,
    },
    #[error("no unplaced vertices remain")]
    NoUnplacedVertices,
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("rdd undefined: reference matrix is zero but the estimate is not")]
    ZeroReference,
    #[error("{path}: row {row}, column {col}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        col: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
