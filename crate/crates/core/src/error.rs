use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// A network assumption does not hold. The message names the clause.
    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("numerical error: {message} (last estimate {last_estimate})")]
    Numerical { message: String, last_estimate: f64 },

    #[error("diverged at iteration {k} on agent {agent}")]
    Divergence { k: usize, agent: usize },

    /// The problem oracle does not provide a requested piece of ground truth.
    #[error("problem does not provide {0}")]
    Capability(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
