use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// `line` is the 1-based record number in the file, header included.
    #[error("cannot parse {value:?} at line {line}, column {column:?}")]
    Parse { line: usize, column: String, value: String },

    #[error("dataset needs at least 2 rows and 2 columns, got {rows}x{cols}")]
    EmptyDataset { rows: usize, cols: usize },

    #[error("duplicate {kind} name {name:?}")]
    DuplicateName { kind: &'static str, name: String },

    #[error("column {0:?} not found")]
    ColumnNotFound(String),

    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),

    #[error("column {0:?} has zero variance")]
    ZeroVariance(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid cluster count k={k} for {p} variables")]
    InvalidK { k: usize, p: usize },

    #[error("need at least {needed} candidate K values, got {got}")]
    RangeTooSmall { needed: usize, got: usize },

    #[error("exhaustive partition search supports at most {max} variables, got {p}")]
    TooLarge { p: usize, max: usize },

    #[error("PCA and clustering variable sets differ")]
    VariableSetMismatch,

    #[error("component {0} has a zero contribution total")]
    DegenerateComponent(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{} already exists (use --force to overwrite)", .0.display())]
    OutputExists(PathBuf),
}

impl Error {
    /// Process exit code: 2 for input problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConvergenceFailure { .. } | Error::DegenerateComponent(_) | Error::TooLarge { .. } => 3,
            _ => 2,
        }
    }
}
