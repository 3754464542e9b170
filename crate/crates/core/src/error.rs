use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a physical function.
    #[error("domain error: {what} = {value} ({reason})")]
    Domain {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Parameters leave a formula without a well-defined value
    /// (vanishing denominator, no dissipation at all, ...).
    #[error("degenerate model: {0}")]
    Degenerate(String),

    /// An operation was called on a model outside the case it solves.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("steady state is not unique: Liouvillian kernel has dimension {dim}")]
    KernelDimension { dim: usize },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: String,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(
        "series not converged: |J(t_end) - J_ss| = {deviation:e} exceeds tolerance {tolerance:e}"
    )]
    Unconverged { deviation: f64, tolerance: f64 },
}

impl Error {
    /// Whether the error stems from numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_)
                | Error::KernelDimension { .. }
                | Error::NonFinite { .. }
                | Error::Invariant(_)
                | Error::Unconverged { .. }
        )
    }
}
