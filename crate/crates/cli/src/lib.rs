//! Command-line front end for `setalg`: instance files, seeded generators,
//! verification campaigns and the reports they print.

pub mod campaigns;
pub mod commands;
pub mod gen;
pub mod instance;
pub mod oracles;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Usage and parse problems exit with 2; verification failures are
    /// reports, not errors, and exit with 1.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
