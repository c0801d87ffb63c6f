//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Shape or dimension disagreement between operands.
    #[error("dimension mismatch in {context}: {detail}")]
    Dimension { context: &'static str, detail: String },

    /// A matrix failed a structural validation (Hermiticity, squareness, ...).
    #[error("validation failed for `{field}`: {detail}")]
    Validation { field: String, detail: String },

    /// An out-of-range control amplitude or action index.
    #[error("control out of bounds: {0}")]
    ControlBounds(String),

    /// Unknown builtin system name.
    #[error("unknown system `{0}` (expected one of q2, q3, open3, open4, or a file path)")]
    UnknownSystem(String),

    /// Configuration field outside its documented range.
    #[error("invalid config field `{field}`: {detail}")]
    Config { field: String, detail: String },

    /// A non-finite loss during training, with the offending batch index.
    #[error("training fault: non-finite loss (batch index {batch_index})")]
    TrainingFault { batch_index: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension { context, detail: detail.into() }
    }

    pub(crate) fn validation(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), detail: detail.into() }
    }

    pub(crate) fn config(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config { field: field.into(), detail: detail.into() }
    }
}
