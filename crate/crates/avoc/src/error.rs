use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset must have at least one point and one dimension")]
    EmptyDataset,

    #[error("non-finite coordinate at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("assignment length {found} does not match point count {expected}")]
    AssignmentLength { found: usize, expected: usize },

    #[error("cluster index {index} out of range for k={k}")]
    ClusterIndexOutOfRange { index: usize, k: usize },

    #[error("cluster {cluster} is empty")]
    EmptyCluster { cluster: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("requested {k} clusters but only {n} points available")]
    TooFewPoints { k: usize, n: usize },

    #[error("cluster {cluster} has {size} points, fewer than the {t} anticlusters")]
    ClusterSmallerThanT { cluster: usize, size: usize, t: usize },

    #[error("subproblem values length {found} does not match anticluster count {expected}")]
    SubproblemValuesLength { found: usize, expected: usize },

    #[error("instance too large for brute force: n={n}, k={k} (limits n<=14, k<=4)")]
    BruteForceTooLarge { n: usize, k: usize },

    #[error("time budget must be positive, got {0}")]
    InvalidBudget(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("certificate has no per-anticluster results")]
    EmptyCertificate,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
