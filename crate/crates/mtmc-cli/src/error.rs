//! Error taxonomy for the experiment runner.
//!
//! Failures split into exactly two kinds because the process exposes exactly
//! two failure exit codes: configuration problems (exit 2) are the caller's
//! to fix and always name the offending field or file, while runtime
//! problems (exit 3) come from the experiment itself — a sampler error, an
//! unwritable output directory — and carry the scenario name for context.

use thiserror::Error;

/// Anything that can stop a subcommand, tagged with its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(#[from] RuntimeError),
}

impl CliError {
    /// Process exit code mandated for this failure class.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

/// A problem with the scenario file: unreadable, unparsable, or failing
/// validation. The message always identifies the field or location.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// A failure while executing a valid scenario.
#[derive(Debug, Error)]
#[error("scenario `{scenario}`: {message}")]
pub struct RuntimeError {
    pub scenario: String,
    pub message: String,
}

impl RuntimeError {
    pub fn new(scenario: impl Into<String>, message: impl std::fmt::Display) -> Self {
        RuntimeError {
            scenario: scenario.into(),
            message: message.to_string(),
        }
    }
}
