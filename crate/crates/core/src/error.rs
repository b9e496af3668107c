use std::io;

/// Errors produced by the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Malformed input file or record.
    #[error("format error: {0}")]
    Format(String),
    /// A channel-use or power budget is violated.
    #[error("allocation error: {0}")]
    Allocation(String),
    /// No plan satisfies the allocator constraints.
    #[error("infeasible allocation: {0}")]
    Infeasible(String),
    /// Configuration file or flag problem.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
