use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum CliError {
    /// Bad input data: exit code 1.
    Input(String),
    /// Bad invocation: exit code 2.
    Usage(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Usage(_) => 2,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> CliError {
        CliError::Input(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Usage(m) => write!(f, "error: {m}"),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
