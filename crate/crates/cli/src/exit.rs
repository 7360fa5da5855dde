//! Exit-code taxonomy.

use std::fmt;

use stz::Error;

/// Process exit codes. Usage errors from argument parsing exit with 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Config = 3,
    Numeric = 4,
    Io = 5,
    Corrupt = 6,
    Version = 7,
}

impl ExitCode {
    pub fn of(e: &Error) -> Self {
        match e {
            Error::Config(_) | Error::Contract(_) | Error::Json(_) => ExitCode::Config,
            Error::SvdNonConvergence { .. }
            | Error::NonFinite(_)
            | Error::DegenerateReference
            | Error::DegenerateFactor(_)
            | Error::NotSemiOrthogonal(_)
            | Error::PhaseNormalizationMissing(_)
            | Error::Divergence { .. }
            | Error::ZeroReferenceRate
            | Error::Eigen { .. } => ExitCode::Numeric,
            Error::BadMagic { .. } | Error::Io(_) | Error::Csv(_) => ExitCode::Io,
            Error::Checksum(_) | Error::Truncated(_) | Error::Malformed(_) => ExitCode::Corrupt,
            Error::UnsupportedVersion { .. } => ExitCode::Version,
        }
    }
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn new(code: ExitCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ExitCode::Config, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(ExitCode::Io, message)
    }

    /// Wraps a library error with a context prefix.
    pub fn wrap(context: impl fmt::Display) -> impl FnOnce(Error) -> CliError {
        move |e| CliError::new(ExitCode::of(&e), format!("{context}: {e}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(ExitCode::of(&e), e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
