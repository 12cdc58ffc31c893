use std::path::PathBuf;

use thiserror::Error;

use crate::metrics::Mismatch;
use crate::wire::WireError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("multiset elements must be non-empty")]
    EmptyElement,

    #[error("insert count must be at least 1")]
    ZeroTimes,

    #[error("count for element overflows a 64-bit counter")]
    CountOverflow,

    #[error("similarity is undefined: {0}")]
    UndefinedSimilarity(&'static str),

    #[error("sketches are not comparable: {0}")]
    Incompatible(Mismatch),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cannot generate corpus: {0}")]
    Generation(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error(transparent)]
    Wire(#[from] WireError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
