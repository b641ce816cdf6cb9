use thiserror::Error;

/// Failure classes, each with a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
    #[error("degenerate fit: {0}")]
    Fit(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Fit(_) => 4,
            CliError::Invariant(_) => 5,
        }
    }
}

impl From<firelab::Error> for CliError {
    fn from(e: firelab::Error) -> Self {
        use firelab::Error as E;
        match e {
            E::InvalidParameter(_) | E::WindowTooSmall { .. } | E::BeyondCriticalTime(_) => {
                CliError::Config(e.to_string())
            }
            E::DegenerateFit(m) => CliError::Fit(m),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}
