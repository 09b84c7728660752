use thiserror::Error;

/// Crate-wide error type. The three broad classes map onto CLI exit codes:
/// input problems (2), numeric failures (3), and configuration errors (4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("input: {0}")]
    Input(String),
    #[error("numeric: {0}")]
    Numeric(String),
    /// Long-run variance numerically zero, so the standardized statistic is
    /// undefined; raised for exact-fit residuals and common-trend panels.
    /// A numeric-class error, kept separate so callers can react to it.
    #[error("numeric: {0}")]
    DegenerateVariance(String),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Prefix the message with the pipeline stage that failed, preserving
    /// the error class.
    pub fn with_stage(self, stage: &str) -> Error {
        match self {
            Error::Input(m) => Error::Input(format!("{stage}: {m}")),
            Error::Numeric(m) => Error::Numeric(format!("{stage}: {m}")),
            Error::DegenerateVariance(m) => {
                Error::DegenerateVariance(format!("{stage}: {m}"))
            }
            Error::Config(m) => Error::Config(format!("{stage}: {m}")),
        }
    }

    /// Process exit code for the CLI: 2 input, 3 numeric, 4 config.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) => 2,
            Error::Numeric(_) | Error::DegenerateVariance(_) => 3,
            Error::Config(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
