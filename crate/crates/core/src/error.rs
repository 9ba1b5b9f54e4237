use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Values are carried as `f64` for reporting only; the computations that
/// produced them run at working precision.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A shifted tridiagonal solve (or a pole of `f`) hit a Ritz value.
    #[error("singular shift: z = {shift:e} is within {distance:e} of Ritz value {ritz:e}")]
    SingularShift { shift: f64, ritz: f64, distance: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (worst off-diagonal {residual:e})")]
    Solver { sweeps: usize, residual: f64 },

    #[error("{method} did not converge after {iterations} iterations: {detail}")]
    Convergence {
        method: &'static str,
        iterations: usize,
        detail: String,
    },

    /// The construction collapsed because the target is exactly representable.
    #[error("degenerate construction: {0}")]
    Degenerate(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
