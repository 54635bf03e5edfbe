use thiserror::Error;

/// Errors produced by the feature, estimation and classification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An iterative estimator hit its iteration cap or left the finite range.
    #[error("no convergence after {iterations} iterations: {reason}")]
    Convergence {
        iterations: usize,
        reason: String,
        last: Vec<f64>,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("channel {channel}: {source}")]
    Channel {
        channel: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("model format: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    pub fn in_channel(self, channel: usize) -> Self {
        Error::Channel {
            channel,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
