use thiserror::Error;

/// Errors raised by the algebra, protocol and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input was out of range or had the wrong shape.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The request exceeds what the dense representation supports.
    #[error("unsupported size: {0}")]
    Capability(String),
    /// A numerical precondition (e.g. strict positivity) does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The constraint system admits no (strictly) feasible state.
    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
