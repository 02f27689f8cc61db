use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Two parameter sets (or a parameter set and an architecture) disagree
    /// on their (name, shape) sequence, or matrix dimensions do not match.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// Non-finite values or parameters outside their mathematical domain.
    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    /// Malformed bytes in a checkpoint, wire payload or IDX file.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    /// A partition request asked for more samples than a label group holds.
    #[error("capacity error for group {group}: requested {requested}, available {available}")]
    Capacity {
        group: String,
        requested: usize,
        available: usize,
    },

    /// A violation of the federation protocol (empty update list, failed client).
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Bad experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
