use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("parameter out of range: {0}")]
    Range(String),

    /// Adaptive quadrature hit its depth limit; the best estimate is kept.
    #[error("quadrature did not converge ({context}): estimate {estimate:e} with error bound {bound:e}")]
    Accuracy {
        context: String,
        estimate: f64,
        bound: f64,
    },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short stable tag, used by the command line diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Domain(_) => "domain",
            Error::Unsupported(_) => "unsupported",
            Error::Range(_) => "range",
            Error::Accuracy { .. } => "accuracy",
            Error::Optimization(_) => "optimization",
            Error::Parse(_) => "parse",
        }
    }
}
