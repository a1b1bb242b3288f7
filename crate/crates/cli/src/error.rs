use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::validate::ValidationReport;

/// Where in a config file a problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field '{field}': ")?;
        }
        f.write_str(&self.msg)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("infeasible instance: {0}")]
    Infeasible(wpcn::Error),
    #[error("{0}")]
    Core(wpcn::Error),
    #[error("schedule failed validation with {} violation(s)", .0.violations.len())]
    Validation(ValidationReport),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Infeasible(_) => 3,
            CliError::Config(_) | CliError::Core(_) | CliError::Io { .. } | CliError::Csv(_) => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<wpcn::Error> for CliError {
    fn from(e: wpcn::Error) -> Self {
        if is_infeasibility(&e) {
            CliError::Infeasible(e)
        } else {
            CliError::Core(e)
        }
    }
}

/// Errors that mean the realization has no valid schedule, as opposed to
/// bad input.
pub fn is_infeasibility(e: &wpcn::Error) -> bool {
    matches!(
        e,
        wpcn::Error::InfeasibleUser { .. }
            | wpcn::Error::NeverAffordable { .. }
            | wpcn::Error::Numerical { .. }
    )
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
