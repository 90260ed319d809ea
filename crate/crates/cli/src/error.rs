use thiserror::Error;

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_PROPERTY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("property failed: {0}")]
    Property(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Precondition(_) | CliError::Io(_) => EXIT_PRECONDITION,
            CliError::Property(_) => EXIT_PROPERTY,
        }
    }
}

impl From<pmaxent_core::Error> for CliError {
    fn from(e: pmaxent_core::Error) -> Self {
        CliError::Precondition(e.to_string())
    }
}
