use thiserror::Error;

/// Errors raised by predictors, samplers and the experiment driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("need at least two beams, got {0}")]
    TooFewBeams(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unphysical input: {0}")]
    Unphysical(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("plan error: {0}")]
    Plan(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
