use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("action level {level} outside grid of {levels} levels")]
    ActionOutOfGrid { level: usize, levels: usize },

    #[error("replay buffer holds {have} transitions, {need} required")]
    Underfilled { have: usize, need: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("checkpoint integrity check failed")]
    Integrity,

    #[error("missing checkpoint {0}")]
    MissingCheckpoint(PathBuf),

    #[error("log error: {0}")]
    Log(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
