use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("index error: |m| = {m} exceeds l = {l}")]
    Index { l: usize, m: i64 },

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    /// A term of the kernel double series is too large for the requested
    /// accuracy, or the truncated tail is not negligible.
    #[error("kernel series unreliable at mu = {mu}, t = {t}: {reason}")]
    TruncationOverflow { mu: f64, t: f64, reason: String },

    #[error("closed form singular at mu = {mu} (|Omega| = {omega_abs:e})")]
    BranchPointSingularity { mu: f64, omega_abs: f64 },

    #[error("contour inversion failed at mu = {mu}, t = {t}: {reason}")]
    ContourFailure { mu: f64, t: f64, reason: String },

    #[error("integral does not converge: {0}")]
    NonConvergent(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("conjugate symmetry violated at (l, m) = ({l}, {m}) by {deviation:e}")]
    SymmetryViolation { l: usize, m: usize, deviation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
