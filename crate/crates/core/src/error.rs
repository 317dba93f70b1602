use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid tree: {}", join(.0))]
    InvalidTree(Vec<Violation>),
    #[error("schedule has {got} times for {expected} edges")]
    ScheduleLength { expected: usize, got: usize },
    #[error("duplicate cut time on edges {0} and {1}")]
    DuplicateTime(usize, usize),
    #[error("operation requires a rank-mode schedule")]
    RanksRequired,
    #[error("budget {0} is not on the breakpoint grid")]
    OffGrid(String),
    #[error("unknown leaf {0}")]
    UnknownLeaf(u32),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty sample")]
    EmptySample,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
