use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {cols} columns")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("matrix is asymmetric: max |a[j][k] - a[k][j]| = {max_diff:e} exceeds {allowed:e}")]
    Asymmetry { max_diff: f64, allowed: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    Convergence { sweeps: usize, off_norm: f64 },

    #[error("question schema invalid for '{question}': {reason}")]
    InvalidSchema { question: String, reason: String },

    #[error("column '{0}' has no question schema")]
    SchemaMismatch(String),

    #[error("dataset is empty ({n} respondents, {p} questions)")]
    EmptyDataset { n: usize, p: usize },

    #[error("at least {needed} respondents required, got {got}")]
    TooFewRespondents { needed: usize, got: usize },

    #[error("weights of pairwise set ({0}, {1}) sum to zero")]
    DegenerateWeights(usize, usize),

    #[error("invalid weight {weight} for respondent {row}")]
    InvalidWeight { row: usize, weight: f64 },

    #[error("total variance is zero; spectral concentration undefined")]
    ZeroVariance,

    #[error("series is empty")]
    EmptySeries,

    #[error("unknown group variable '{0}'")]
    UnknownGroupVariable(String),

    #[error("every group was dropped (min cell size {min_cell})")]
    AllGroupsDropped { min_cell: usize },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {lambda_min:e})")]
    NotPsd { lambda_min: f64 },

    #[error("{failed} of {total} bootstrap replicates failed (limit 1%)")]
    FailureRate { failed: usize, total: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: u64, column: usize, message: String },

    #[error("weight problem: {0}")]
    MissingWeight(String),

    #[error("bin {bin}: {source}")]
    InBin {
        bin: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from bad input (as opposed to a runtime failure).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Convergence { .. } | Error::FailureRate { .. } | Error::Io(_) => false,
            Error::InBin { source, .. } => source.is_validation(),
            _ => true,
        }
    }

    pub(crate) fn in_bin(self, bin: &str) -> Error {
        Error::InBin { bin: bin.to_string(), source: Box::new(self) }
    }
}
