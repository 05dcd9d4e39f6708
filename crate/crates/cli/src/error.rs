//! CLI error taxonomy mapped to exit codes: 0 ok, 1 numeric, 2
//! usage/config, 3 io.

use lyapq_core::CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Numerical failure inside a simulation.
    Numeric(String),
    /// Bad flags, bad config file, or out-of-range values.
    Config(String),
    /// Filesystem and serialization problems.
    Io(String),
}

impl CliError {
    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Numeric(_) => "numeric",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Numeric(m) | CliError::Config(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParam { .. } | CoreError::GridMismatch { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
