use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("graph invariant violated: {0}")]
    Graph(String),

    #[error("cannot construct initial network: {0}")]
    Construction(String),

    #[error("invalid degree distribution: {0}")]
    Distribution(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("master equation integration lost positivity at step {step} (t = {time}): p({degree}) = {value:e}")]
    Stability {
        step: usize,
        time: f64,
        degree: usize,
        value: f64,
    },

    #[error("simulation failed at step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}
