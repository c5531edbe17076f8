use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data or parameters break a documented invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// The density assumption cannot be certified for the given variance function.
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The driving path is outside the regime required by an experiment.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error comes from a numeric failure rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::AssumptionViolated(_) => "assumption",
            Error::Numeric(_) => "numeric",
            Error::Size(_) => "size",
            Error::Config(_) => "config",
            Error::Regime(_) => "regime",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
