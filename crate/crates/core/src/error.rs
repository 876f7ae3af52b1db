use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the reuse pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate method id `{0}`")]
    DuplicateId(String),

    #[error("method `{id}` has an empty {field}")]
    EmptyField { id: String, field: &'static str },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no question/solution pair found in backend response")]
    UnparseableResponse,

    #[error("backend answer carries no yes/no verdict: {0:?}")]
    UnparseableVerdict(String),

    #[error("no recorded response for prompt digest {0}")]
    MissingFixture(String),

    #[error("scripted backend queue is exhausted")]
    ScriptExhausted,

    #[error("http backend returned status {0}")]
    HttpStatus(u16),

    #[error("http backend timed out")]
    Timeout,

    #[error("backend failure: {0}")]
    Backend(String),

    #[error("unknown prompt template `{0}`")]
    UnknownTemplate(String),

    #[error("template `{template}` has unbound placeholder `{placeholder}`")]
    UnboundPlaceholder { template: String, placeholder: String },

    #[error("vector dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),

    #[error("measurable `{key}` has mismatched units ({left:?} vs {right:?})")]
    UnitMismatch { key: String, left: String, right: String },

    #[error("scope must not be empty")]
    EmptyScope,

    #[error("method library is empty")]
    EmptyLibrary,

    #[error("both samples have zero variance")]
    DegenerateVariance,

    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that originate from a language-model backend.
    pub fn is_backend(&self) -> bool {
        matches!(
            self,
            Error::MissingFixture(_)
                | Error::ScriptExhausted
                | Error::HttpStatus(_)
                | Error::Timeout
                | Error::Backend(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
