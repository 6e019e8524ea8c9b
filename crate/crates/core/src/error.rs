use thiserror::Error;

use crate::device::Ticket;
use crate::regime::Regime;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("inconsistent sizes: {0}")]
    InconsistentSizes(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot take the centroid of an empty cluster")]
    EmptyCluster,

    #[error("need at least 2 samples, got {n}")]
    InsufficientData { n: usize },

    #[error("need at least {k} distinct samples, found only {distinct}")]
    DegenerateData { k: usize, distinct: usize },

    #[error("regime {requested} is not allowed for n = {n}")]
    RegimeNotAllowed { requested: Regime, n: usize },

    #[error("device unavailable: {0}")]
    DeviceUnavailable(String),

    #[error("job needs {needed} bytes, device accepts at most {limit}")]
    CapacityExceeded { needed: usize, limit: usize },

    #[error("device lost: {0}")]
    DeviceLost(String),

    #[error("unknown ticket {0}")]
    UnknownTicket(Ticket),

    #[error("ticket {0} was already collected")]
    DoubleCollect(Ticket),

    #[error("job validation failed: {0}")]
    ValidationFailure(String),
}
