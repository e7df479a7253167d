//! Partial predicate abstraction for transition systems over linear integer
//! arithmetic and booleans, with two predicate-selection heuristics and a
//! bounded symbolic ACTL checker.

pub mod abstraction;
pub mod checker;
pub mod compat;
pub mod config;
pub mod formula;
pub mod model;
pub mod trlimp;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("rename maps both {first} and {second} to {target}")]
    RenameCollision {
        first: String,
        second: String,
        target: String,
    },
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Kind(String),
    #[error("no transitions")]
    NoTransitions,
    #[error("property atom `{0}` is not expressible over the predicates")]
    Unexpressible(String),
    #[error("unsupported operator: {0}")]
    Unsupported(String),
    #[error("no feasible configuration")]
    NoFeasibleConfig,
    #[error("state space exceeds {0} states")]
    StateExplosion(usize),
    #[error("successor leaves the box: {0}")]
    ClosureViolation(String),
}
