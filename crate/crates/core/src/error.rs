use thiserror::Error;

use crate::schedule::ConditionReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An index or block lies beyond the last block boundary the schedule knows.
    #[error("prefix exceeded: {0}")]
    PrefixExceeded(String),

    /// A construction needs a block the schedule prefix does not contain;
    /// extending the prefix fixes it.
    #[error("schedule prefix too short: {0}")]
    PrefixTooShort(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("schedule violates its conditions: {0}")]
    InvalidSchedule(ConditionReport),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}
