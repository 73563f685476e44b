use thiserror::Error;

/// Errors surfaced by the verification pipelines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input data (non-increasing grid, NaN samples, parse failures).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The certified mass beyond the truncation radius exceeds the quadrature budget.
    #[error("tail not negligible: estimated tail mass {estimate:e} exceeds tolerance {tolerance:e}")]
    TailNotNegligible { estimate: f64, tolerance: f64 },

    /// A Hopf-Lax verifier was handed a function outside the admissible class.
    #[error("function class violation: A1 lipschitz={lipschitz_ok}, A1 bounded nonneg set={nonneg_set_bounded}, A2 finite={q_t0_finite}, A3 growth={growth_ok}")]
    ClassViolation {
        lipschitz_ok: bool,
        nonneg_set_bounded: bool,
        q_t0_finite: bool,
        growth_ok: bool,
    },

    /// A function could not be normalized (zero or non-finite norm).
    #[error("normalization failure: {0}")]
    Normalization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
