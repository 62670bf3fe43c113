//! Library surface of the command-line driver, shared with its integration
//! tests: configuration loading, report/CSV handling, and the command
//! implementations.

pub mod config;
pub mod report;
pub mod run;

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration; exits 2.
    Config(String),
    /// Calibration or search target cannot be met; exits 3.
    Unreachable(String),
    /// Everything else; exits 1.
    Run(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Unreachable(m) => write!(f, "target unreachable: {m}"),
            CliError::Run(m) => write!(f, "{m}"),
        }
    }
}
