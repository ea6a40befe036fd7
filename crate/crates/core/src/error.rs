use thiserror::Error;

use crate::ode::OutcomeKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot bracket delta*: {0}")]
    Bracket(String),

    #[error("indeterminate shot at delta = {delta}: {kind:?}")]
    Indeterminate { delta: f64, kind: OutcomeKind },

    #[error(
        "no convergence at delta = {delta}: |x'(s1) + 1| = {achieved:e} exceeds angle tolerance {angle_tol:e}"
    )]
    NoConvergence {
        delta: f64,
        achieved: f64,
        angle_tol: f64,
    },

    #[error("joint error: {0}")]
    Joint(String),

    #[error("closed profile is not simple: segments {first} and {second} intersect")]
    Simplicity { first: usize, second: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
