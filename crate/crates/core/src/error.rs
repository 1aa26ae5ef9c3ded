use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the object is defined.
    #[error("{what}: {value} is outside [{lo}, {hi}]")]
    Domain {
        what: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    /// A precondition of the operation does not hold.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A series or integral that must converge does not.
    #[error("divergent: {0}")]
    Divergent(String),
    /// Malformed input (unknown registry name, bad parameters).
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(what: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Error::Domain {
            what: what.into(),
            value,
            lo,
            hi,
        }
    }

    /// True for errors caused by user input rather than the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
