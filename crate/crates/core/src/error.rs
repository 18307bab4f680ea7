use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    /// The right-hand side of the bare-to-observed mass relation is not positive.
    #[error(
        "mass renormalization violates positivity (1/m = {inverse_mass:e}); critical charge |q*| = {critical_charge:e}"
    )]
    PositivityViolation { inverse_mass: f64, critical_charge: f64 },

    #[error("unsupported dimension d = {d}: {context}")]
    UnsupportedDimension { d: usize, context: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unsupported potential: {0}")]
    UnsupportedPotential(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:e})")]
    ConvergenceFailure { iterations: usize, best_residual: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
