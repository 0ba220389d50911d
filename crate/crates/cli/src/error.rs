use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTEGRITY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("runtime: {0}")]
    Runtime(String),
    #[error("integrity: {0}")]
    Integrity(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::Integrity(_) => EXIT_INTEGRITY,
        }
    }
}

/// Parameter problems in a scenario are configuration errors; everything else
/// raised while running is a runtime failure.
pub fn from_core_config(e: sdrd_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

pub fn from_core_runtime(e: sdrd_core::Error) -> CliError {
    match e {
        sdrd_core::Error::Parameter(_) | sdrd_core::Error::Precondition(_) => CliError::Config(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    }
}

pub fn io_error(what: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", what.display()))
}

pub type CliResult<T> = std::result::Result<T, CliError>;
