use thiserror::Error;

/// Errors raised by the analysis, optimization and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural precondition is violated (e.g. a backend used with the wrong diversity order).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// No operating point satisfies the constraint set.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Two algebraically equivalent evaluation routes disagree.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
