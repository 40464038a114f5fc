use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {value} is outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("series did not converge within {terms} terms (last term magnitude {last_term:e})")]
    Truncation { terms: usize, last_term: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("singular matrix at row {0}")]
    Singular(usize),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("symbol is negative ({value:e}) at x = {x}")]
    PositivityViolation { x: f64, value: f64 },

    #[error("linear solve failed at time level {level}: {source}")]
    LevelSolve {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("missing history level {0}")]
    MissingHistory(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
