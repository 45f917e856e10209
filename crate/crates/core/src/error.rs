use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the analysis routines.
///
/// Verdicts such as "not minimal" are never errors; these variants cover
/// malformed inputs, violated preconditions and numerical breakdown.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix `{0}` contains non-finite entries")]
    NonFinite(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("row index {index} out of range for block of height {height}")]
    IndexOutOfRange { index: usize, height: usize },
    #[error("cannot evaluate at s = {s}: distance {distance:.3e} to spect(A) is within tolerance")]
    PoleEvaluation { s: Complex64, distance: f64 },
    #[error("lambda = {lambda} lies within tolerance of spect(D); (lambda I - D) is singular")]
    SingularBridge { lambda: Complex64 },
    #[error("realization matrix is singular at the rank tolerance")]
    SingularFamily,
    #[error("no spectrum-disjoining gain found for eta up to {max_eta:e}")]
    NoGainFound { max_eta: f64 },
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("invariant failure (tolerance problem): {0}")]
    InvariantFailure(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the
    /// numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NumericalBreakdown(_) | Error::InvariantFailure(_) | Error::NoGainFound { .. }
        )
    }
}
