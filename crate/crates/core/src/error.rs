use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("position leaves the board at step {step}")]
    OutOfBounds { step: usize },
    #[error("path needs at least two moves, got {0}")]
    PathTooShort(usize),
    #[error("no conforming {task} instance after {attempts} attempts")]
    GenerationBudgetExceeded { task: &'static str, attempts: usize },
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("modality {mode} is not offered for {task}")]
    UnsupportedModality { task: &'static str, mode: &'static str },
    #[error("operation not supported for {0}")]
    UnsupportedTask(&'static str),
    #[error("solution does not replay: {0}")]
    InvalidSolution(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("gateway error: {0}")]
    Gateway(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
