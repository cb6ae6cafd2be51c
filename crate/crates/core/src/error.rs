use thiserror::Error;

/// Errors raised by the laboratory.
///
/// The variants split into caller mistakes (`InvalidInput`) and numerical
/// failures; the CLI maps these to different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver did not converge after {iterations} iterations (active block ends at {index})")]
    NoConvergence { iterations: usize, index: usize },

    #[error("could not isolate the Herglotz root at alpha = {alpha_re}+{alpha_im}i; candidates {roots:?}")]
    AmbiguousBranch {
        alpha_re: f64,
        alpha_im: f64,
        roots: [(f64, f64); 3],
    },

    #[error("x = {x} lies within {tol} of a support threshold; root count is indeterminate")]
    BoundaryIndeterminate { x: f64, tol: f64 },

    #[error("all {trials} trials were excluded by the truncation gates")]
    AllTrialsExcluded { trials: usize },

    #[error("vector violates the spread-set premise: |J(x)| = {found} < {needed}")]
    Structural { found: usize, needed: usize },
}

impl Error {
    /// Whether the error is a caller/validation problem rather than a
    /// numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::BoundaryIndeterminate { .. } | Error::Structural { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
