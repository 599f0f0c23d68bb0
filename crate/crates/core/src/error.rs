use std::io;

use thiserror::Error;

use crate::model::ModelParams;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("graph generation failed: {0}")]
    Generation(String),

    #[error("problem size {n} exceeds the enumeration limit of {max}")]
    Capacity { n: usize, max: usize },

    #[error("argument outside the support: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (last iterate beta={}, B={})", last.beta, last.b_field)]
    Convergence {
        iterations: usize,
        last: ModelParams,
    },

    #[error("non-finite gradient at iteration {iteration}: {detail}")]
    NonFiniteGradient { iteration: usize, detail: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn param_err(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
