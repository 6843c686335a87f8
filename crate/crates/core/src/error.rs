use thiserror::Error;

/// Errors raised by the series kernel, the group machinery and the solver.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("division by zero series")]
    DivisionByZero,

    #[error("operation requires a nonzero series")]
    ZeroSeries,

    /// A comparison or truncation reached into the zone below a cutoff,
    /// where the coefficients are unknown.
    #[error("precision exhausted: {0}")]
    Precision(String),

    /// The monomial whose asymptotic integral was requested sits on the
    /// pseudo-gap of the field. Carries the monomial in canonical text form.
    #[error("pseudo-gap: no asymptotic integral for {monomial}")]
    PseudoGap { monomial: String },

    #[error("series is not contracting: {0}")]
    NotContracting(String),

    #[error("series is not parabolic: {0}")]
    NotParabolic(String),

    #[error("log-depth {found} exceeds the fixed depth {limit}")]
    DepthExceeded { found: usize, limit: usize },

    #[error("iteration limit of {limit} reached in {what}")]
    IterationLimit { what: &'static str, limit: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
