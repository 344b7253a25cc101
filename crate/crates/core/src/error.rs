use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, left is {left:?}, right is {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("{op}: matrix is not symmetric")]
    Asymmetric { op: &'static str },

    #[error(
        "power iteration did not converge in {iterations} iterations (last estimate {estimate})"
    )]
    NotConverged { iterations: usize, estimate: f64 },

    #[error("linear system is singular at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("expected exactly 2 classes, found {found}")]
    ClassCount { found: usize },

    #[error("class {class} has no samples")]
    EmptyClass { class: usize },

    #[error(
        "all feature scores are zero; no feature is informative enough to build a feature graph"
    )]
    NoInformativeFeatures,

    #[error("{op}: mask selects no rows")]
    EmptyMask { op: &'static str },

    #[error("class {class} has {count} samples, fewer than the {folds} folds requested")]
    ClassTooSmall {
        class: usize,
        count: usize,
        folds: usize,
    },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("column `{name}` not found in header")]
    MissingColumn { name: String },

    #[error("feature column `{name}` is not numeric")]
    NonNumericColumn { name: String },

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    UnparseableValue {
        row: usize,
        column: String,
        value: String,
    },

    #[error("label column has {found} distinct values after filtering; need exactly 2")]
    LabelCount { found: usize },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
