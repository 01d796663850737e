use std::path::PathBuf;

use crate::corpus::Violation;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed line in a TSV / term-list / embedding / checkpoint file.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Input violates a stated contract (duplicate ids, bad spans, bad config).
    #[error("validation error: {0}")]
    Validation(String),

    /// Corpus assembly failed; every violation is listed, not just the first.
    #[error("corpus validation failed with {} violation(s):\n{}", .0.len(), format_violations(.0))]
    CorpusValidation(Vec<Violation>),

    #[error("gazetteer list {name:?} normalizes to an empty term set")]
    EmptyGazetteer { name: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
