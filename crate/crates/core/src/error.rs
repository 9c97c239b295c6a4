//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),

    #[error("column `{column}` has {bad} non-numeric cells out of {rows} rows")]
    NonNumericColumn {
        column: String,
        bad: usize,
        rows: usize,
    },

    #[error("column `{0}` is entirely missing, cannot impute")]
    AllMissing(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("feature `{0}` is equivalent to the target positions")]
    TargetEquivalentFeature(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("design matrix is rank deficient; use ridge > 0")]
    RankDeficient,

    #[error("model file format error: {0}")]
    ModelFormat(String),

    #[error("invalid argument: {0}")]
    InvalidArg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArg(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
