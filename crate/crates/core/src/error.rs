use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// Observations must be finite and strictly positive.
    #[error("observation {value} at index {index} is not a finite positive number")]
    NonPositive { index: usize, value: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid scale range: {0}")]
    Range(String),

    #[error("invalid covariance model: {0}")]
    Covariance(String),

    /// The regression slope is not positive, so α = 1/H is undefined.
    #[error("degenerate estimate: H = {h} (alpha undefined)")]
    Degenerate { h: f64 },

    #[error(
        "numerical integration did not converge on [{lower}, {upper}]: \
         error estimate {error_estimate:e} after {intervals} subintervals"
    )]
    Integration {
        lower: f64,
        upper: f64,
        error_estimate: f64,
        intervals: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sigma1 table, line {line}: {message}")]
    TableFormat { line: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
