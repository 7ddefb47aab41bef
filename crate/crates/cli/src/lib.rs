//! Config-driven front end for the `fredholm2d` solvers.
//!
//! A run is described by a TOML file whose section names the command
//! (`[solve]`, `[study]`, ...). Every run writes a `summary.json` echoing
//! the full config, which can itself be fed back as a config.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_for, Command, Params, RunConfig};
pub use run::execute;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },
    #[error("numerical failure: {0}")]
    Numerical(fredholm2d::Error),
    #[error("{0}")]
    Core(fredholm2d::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 1 for bad input, 2 for numerical breakdown.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<fredholm2d::Error> for CliError {
    fn from(e: fredholm2d::Error) -> Self {
        use fredholm2d::Error as E;
        let key = match &e {
            _ if e.is_numerical() => return CliError::Numerical(e),
            E::InvalidParameter { name, .. } => *name,
            E::TooFewLevels { .. } => "h_ladder",
            E::NonpositiveSigma(_) => "sigma",
            E::ZeroLambda => "lambda",
            E::InvalidSpacing { .. } | E::SpacingTooLarge { .. } => "h",
            E::DegreeTooLarge { .. } => "fit_degree",
            _ => return CliError::Core(e),
        };
        CliError::Validation {
            key: key.to_string(),
            reason: e.to_string(),
        }
    }
}
