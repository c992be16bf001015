use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column}: cannot parse {value:?} as a finite number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row} has {found} fields, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("column {column} ({name}) is constant; cannot normalize")]
    ConstantColumn { column: usize, name: String },

    #[error("distance file line {line}: {message}")]
    DistanceFile { line: usize, message: String },

    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        found: usize,
        expected: usize,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("kernel exponent q = {0} is outside (0, 2]; -||x-y||^q is conditionally positive definite only there")]
    InvalidExponent(f64),

    #[error("coefficients must sum to zero, got {0:e}")]
    CoefficientSum(f64),

    #[error("truncation distance: {0}")]
    TruncationDistance(String),

    #[error("degenerate truncation distance: the selected pairwise distance is 0 (raise t or deduplicate points)")]
    DegenerateDc,

    #[error("k = {k} is out of range for {n} points")]
    KOutOfRange { k: usize, n: usize },

    #[error("no clear center structure: gamma shows no jump")]
    NoJump,

    #[error("rectangle excludes all points")]
    EmptySelection,

    #[error("invalid center selection: {0}")]
    InvalidCenters(String),

    #[error("dataset has no labels; accuracy cannot be computed")]
    MissingLabels,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Process exit code: 2 for data errors, 3 for algorithm errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Csv(_)
            | Error::Parse { .. }
            | Error::Ragged { .. }
            | Error::InvalidData(_)
            | Error::ConstantColumn { .. }
            | Error::DistanceFile { .. }
            | Error::MissingLabels => 2,
            _ => 3,
        }
    }
}
