use std::fmt;

use flucast::Error;

pub const RUNTIME: u8 = 1;
pub const USAGE: u8 = 2;
pub const DATA: u8 = 3;
pub const CONVERGENCE: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: USAGE, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { code: DATA, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { code: RUNTIME, message: message.into() }
    }

    pub fn convergence(message: impl Into<String>) -> Self {
        Self { code: CONVERGENCE, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Reading an input file: unreadable files are usage errors, bad contents
/// are data errors.
pub fn input_error(e: Error) -> CliError {
    match e {
        Error::Io { .. } => CliError::usage(e.to_string()),
        Error::Config(_) => CliError::usage(e.to_string()),
        Error::Convergence(_) => CliError::convergence(e.to_string()),
        _ => CliError::data(e.to_string()),
    }
}

/// Failures during a computation.
pub fn run_error(e: Error) -> CliError {
    match e {
        Error::Convergence(_) => CliError::convergence(e.to_string()),
        Error::Config(_) => CliError::usage(e.to_string()),
        Error::Parse { .. } => CliError::data(e.to_string()),
        _ => CliError::runtime(e.to_string()),
    }
}
