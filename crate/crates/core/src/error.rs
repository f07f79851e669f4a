use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid input parameters (exponents out of range, malformed functions, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("non-finite value on the circle |z| = {radius} (pole on the contour?)")]
    NonFinite { radius: f64 },

    #[error("zero on circle |z| = {radius}: min |f| = {min_modulus:e}; retry at a perturbed radius")]
    ZeroOnCircle { radius: f64, min_modulus: f64 },

    #[error("w too close to f(contour): min |f(z) - w| = {distance:e}")]
    ContourTooClose { distance: f64 },

    #[error("non-integer residue {raw} after raising the contour resolution to {samples}")]
    NonIntegerResidue { raw: f64, samples: usize },

    #[error("root finder did not converge after {sweeps} sweeps")]
    RootFinder { sweeps: usize },

    #[error("construction error: {0}")]
    Construction(String),
}

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors caused by the request itself rather than by the numerics.
    pub fn is_parameter(&self) -> bool {
        matches!(self, Error::Parameter(_))
    }
}
