use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A symbol failed one of its construction-time checks.
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("time {t} is outside the symbol window [{start}, {end}]")]
    OutOfWindow { t: f64, start: f64, end: f64 },

    /// An argument lies outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("time nodes are not aligned with the coefficient schedule: {0}")]
    Alignment(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidSymbol(msg.into())
    }
}
