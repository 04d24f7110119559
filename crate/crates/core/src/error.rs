use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field mismatch: {0}")]
    Mismatch(String),
    #[error("expected a {expected} field, got {found}")]
    WrongSide {
        expected: &'static str,
        found: &'static str,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("snapshot format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::Mismatch(_) => "mismatch",
            Error::WrongSide { .. } => "wrong_side",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonFinite(_) => "non_finite",
            Error::NoConvergence(_) => "no_convergence",
            Error::Degenerate(_) => "degenerate",
            Error::Config(_) => "config",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
