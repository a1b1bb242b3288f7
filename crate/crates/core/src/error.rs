use thiserror::Error;

use crate::lambert::Branch;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lambert W argument {y} outside the domain of the {branch:?} branch")]
    Domain { y: f64, branch: Branch },

    /// The user can never gather enough energy to deliver its demand.
    #[error("user {user_id} is infeasible{}", position.map(|p| format!(" at slot {p}")).unwrap_or_default())]
    InfeasibleUser {
        user_id: usize,
        position: Option<usize>,
    },

    #[error("no valid power allocation for user {user_id}: {detail}")]
    Numerical { user_id: usize, detail: String },

    #[error("user {user_id} can never afford maximum transmit power")]
    NeverAffordable { user_id: usize },

    #[error("{n} users exceeds the exhaustive search cap of {cap}")]
    SizeCapExceeded { n: usize, cap: usize },

    #[error("statistical check failed: {0}")]
    StatisticalFailure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep the kind and text.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message}")]
pub struct IoError {
    pub kind: std::io::ErrorKind,
    pub message: String,
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(IoError {
            kind: e.kind(),
            message: e.to_string(),
        })
    }
}

impl Error {
    /// Attach a slot position to an infeasibility raised while walking an order.
    pub(crate) fn at_position(self, pos: usize) -> Self {
        match self {
            Error::InfeasibleUser { user_id, .. } => Error::InfeasibleUser {
                user_id,
                position: Some(pos),
            },
            other => other,
        }
    }
}
