use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spin pair {0}-{1}: a pulse needs two distinct spins")]
    InvalidPair(String, String),

    #[error("pair {pair} is not a coupling of layout {layout}")]
    LayoutViolation { pair: String, layout: String },

    #[error("dimension mismatch: expected {expected} parameters, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("structure {structure} is not compatible with layout {layout}")]
    IncompatibleStructure { structure: String, layout: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
