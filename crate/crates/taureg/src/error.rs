//! Crate-wide error type.

/// Errors produced by filter evaluation, numerical kernels and experiments.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scalar argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector/matrix shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A precondition of an operation was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A diagonal multiplier entry is (numerically) zero; the forward
    /// operator is not injective on the discrete grid.
    #[error("singular multiplier at index {index}: |value| = {magnitude:e}")]
    SingularMultiplier { index: usize, magnitude: f64 },

    /// The discrepancy bracket does not enclose the threshold.
    #[error(
        "bracket error: residual({lo:e}) = {residual_lo:e}, residual({hi:e}) = {residual_hi:e}, threshold = {threshold:e}"
    )]
    Bracket {
        lo: f64,
        hi: f64,
        residual_lo: f64,
        residual_hi: f64,
        threshold: f64,
    },

    /// The residual trace recorded during bisection was not nondecreasing in alpha.
    #[error("residual not monotone in alpha: r({alpha_lo:e}) = {residual_lo:e} > r({alpha_hi:e}) = {residual_hi:e}")]
    NonMonotone {
        alpha_lo: f64,
        alpha_hi: f64,
        residual_lo: f64,
        residual_hi: f64,
    },

    /// The SVD iteration failed to converge.
    #[error("svd did not converge")]
    SvdFailed,

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
