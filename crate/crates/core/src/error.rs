use thiserror::Error;

use crate::driver::ConstructionLog;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training points {first} and {second} are closer than {tol:e}")]
    DuplicatePoint { first: usize, second: usize, tol: f64 },

    #[error("correlation matrix is singular even with nugget {nugget:e} (closest pair: {first}, {second})")]
    SingularModel { nugget: f64, first: usize, second: usize },

    #[error("limit-state evaluation outside its domain: {0}")]
    Domain(String),

    #[error("unknown benchmark `{id}`; valid ids: {}", valid.join(", "))]
    UnknownBenchmark { id: String, valid: Vec<String> },

    #[error("DoE budget of {budget} points exhausted after {} entries", log.entries.len())]
    BudgetExhausted { budget: usize, log: Box<ConstructionLog> },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
