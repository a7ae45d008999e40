use thiserror::Error;

use crate::game::{GameType, Violation};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game type: {0}")]
    InvalidType(String),

    #[error("invalid game: {}", join(.0))]
    InvalidGame(Vec<Violation>),

    #[error("game types differ: {0} vs {1}")]
    TypeMismatch(Box<GameType>, Box<GameType>),

    #[error("invalid prism state: {0}")]
    InvalidState(String),

    #[error("strategy {0} is out of range")]
    StrategyOutOfRange(usize),

    #[error("diagonal scaling must have one strictly positive entry per group: {0}")]
    InvalidScaling(String),

    #[error("vector is not in the tangent space: group {group} sums to {sum:e}")]
    NotTangent { group: usize, sum: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An internal consistency check failed; this signals a bug, not bad input.
    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
