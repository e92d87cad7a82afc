use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("singular to working precision (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("not sectorial")]
    NotSectorial,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("size guard: {0}")]
    Size(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("ill-posed interconnection: {0}")]
    IllPosed(String),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Self::Shape(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Self::Numeric(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Self::Format(e.to_string())
    }
}
