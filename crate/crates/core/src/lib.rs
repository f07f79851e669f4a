//! Numerical laboratory for integral means of derivatives of analytic
//! functions on the unit disk.
//!
//! The crate evaluates Hardy, Bergman, Besov, Littlewood–Paley and Hayman
//! functionals over exactly representable functions (polynomials, lacunary
//! series, finite Blaschke products, rational functions and their products),
//! counts valence through the argument principle, and runs parameter sweeps
//! that compare those functionals against Bernstein-type growth bounds.
//!
//! Measure conventions used throughout:
//! * circle means are normalized, `(1/2π)∫₀^{2π} · dt`;
//! * area integrals use Lebesgue measure `dA`, so the unit disk has mass `π`.

pub mod approximation;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod functions;
pub mod norms;
pub mod quadrature;
pub mod roots;
pub mod sum;
pub mod valence;

pub use error::{Error, Result};
pub use functions::AnalyticFunction;
pub use num_complex::Complex64;

/// Convention string recorded in every report.
pub const CONVENTIONS: &str =
    "circle means normalized by 1/(2*pi); area integrals against Lebesgue dA (area of unit disk = pi)";
