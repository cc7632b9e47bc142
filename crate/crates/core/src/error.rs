use alloc::string::String;

/// Everything that can go wrong inside the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("window holds {count} intervals, cap is {cap}")]
    WindowTooLarge { count: usize, cap: usize },
    #[error("point set cannot be covered by one dyadic interval: {0}")]
    Range(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("missing derivatives: need order {needed}, function provides {available}")]
    MissingDerivatives { needed: usize, available: usize },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("no convergence after {iterations} iterations: {what}")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("unsupported kernel: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures caused by the caller's parameters rather than by numerics.
    pub fn is_argument_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::Precondition(_)
                | Error::WindowTooLarge { .. }
                | Error::Unknown { .. }
                | Error::MissingDerivatives { .. }
                | Error::Unsupported(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn arg(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn pre(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
