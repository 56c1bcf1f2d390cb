use alloc::string::String;

use crate::Triple;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate metric: zero entry at index {index}")]
    DegenerateMetric { index: usize },

    #[error("log-probability {0} is not strictly negative")]
    Domain(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{kind} id {id} out of range (size {size})")]
    OutOfRange { kind: &'static str, id: usize, size: usize },

    #[error("non-finite value while differentiating triple ({}, {}, {}): {what}", .triple.head, .triple.rel, .triple.tail)]
    NonFinite { triple: Triple, what: &'static str },

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("no fixed negatives for head {head}, relation {rel}")]
    MissingNegatives { head: u32, rel: u32 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("cannot aggregate an empty rank list")]
    EmptyRanks,
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
