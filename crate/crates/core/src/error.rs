use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no graphs")]
    NoGraphs,

    #[error("graph {id} is disconnected")]
    Disconnected { id: i64 },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dictionary protocol violation: {0}")]
    Protocol(String),

    #[error("line search failed at iteration {iter}: no step above {min_alpha:e} satisfies the Armijo condition")]
    LineSearch { iter: usize, min_alpha: f64 },

    #[error("non-finite objective at iteration {iter}")]
    NonFinite { iter: usize },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// True for failures of the numerical procedure rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::LineSearch { .. } | Error::NonFinite { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
