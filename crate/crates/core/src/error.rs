use thiserror::Error;

/// Errors produced by the simulator and its analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration input.
    #[error("configuration error: {0}")]
    Config(String),

    /// A sweep axis or config path that does not exist.
    #[error("unknown key `{0}`")]
    UnknownKey(String),

    /// A function was evaluated outside of its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed at t = {time:e} s: {reason}")]
    Integration { time: f64, reason: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("quadrature did not converge (estimated error {achieved:e}, requested {requested:e})")]
    Quadrature { achieved: f64, requested: f64 },

    /// g2(0) needs a non-vanishing retrieved photon number.
    #[error("second-order correlation undefined: mean photon number {mean:e} below threshold {threshold:e}")]
    UndefinedCorrelation { mean: f64, threshold: f64 },

    #[error("transmission pole at omega = {omega:e} rad/s")]
    Pole { omega: f64 },

    #[error("no half-width crossing found below {limit:e} rad/s")]
    NotFound { limit: f64 },

    /// Should never be observed for valid inputs.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("failed to parse configuration at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable code, used to flag failed sweep rows.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::UnknownKey(_) => "unknown_key",
            Error::Domain(_) => "domain",
            Error::Integration { .. } => "integration",
            Error::Numerical(_) => "numerical",
            Error::Quadrature { .. } => "quadrature",
            Error::UndefinedCorrelation { .. } => "undefined_correlation",
            Error::Pole { .. } => "pole",
            Error::NotFound { .. } => "not_found",
            Error::Internal(_) => "internal",
            Error::Usage(_) => "usage",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
