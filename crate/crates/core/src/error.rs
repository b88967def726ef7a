use num_complex::Complex64;

/// Errors raised across the library.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("quadrature did not converge after {panels} panels (partial value {partial}, error estimate {error:e})")]
    NonConvergence {
        partial: Complex64,
        error: f64,
        panels: usize,
    },
    #[error("integrand is not finite at x = {x}")]
    NanIntegrand { x: f64 },
    #[error("curve under-sampled at sample {index}: argument jump {jump:.3} rad")]
    UnderSampled { index: usize, jump: f64 },
    #[error("curve is not closed (gap {gap:e})")]
    CurveNotClosed { gap: f64 },
    #[error("curve enters the exclusion disc of radius {radius:e} at sample {index}")]
    CurveTooClose { index: usize, radius: f64 },
    #[error("contour radius refinement failed: {0}")]
    RadiusRefinement(String),
    #[error("anchor set is ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("not log-integrable: {0}")]
    NotLogIntegrable(String),
    #[error("not a Carleson measure: {0}")]
    NotCarleson(String),
    #[error("pole hit at {0}")]
    Pole(Complex64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Contract(_) | Error::Parse(_) | Error::Pole(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
