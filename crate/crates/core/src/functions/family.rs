use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{AnalyticFunction, BlaschkeProduct, Polynomial};
use crate::{Error, Result};

/// Random test families. Each kind draws from its own ChaCha8 stream so the
/// same seed gives unrelated functions across kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `n` zeros of modulus `1 − 1/n` at uniform random angles.
    ClusteredBlaschke,
    /// `n` zeros uniform with respect to area.
    UniformBlaschke,
    /// Degree-`n` polynomial with standard complex normal coefficients.
    RandomPolynomial,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::ClusteredBlaschke => "clustered-blaschke",
            FamilyKind::UniformBlaschke => "uniform-blaschke",
            FamilyKind::RandomPolynomial => "random-polynomial",
        }
    }

    fn stream(self) -> u64 {
        match self {
            FamilyKind::ClusteredBlaschke => 1,
            FamilyKind::UniformBlaschke => 2,
            FamilyKind::RandomPolynomial => 3,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            FamilyKind::ClusteredBlaschke,
            FamilyKind::UniformBlaschke,
            FamilyKind::RandomPolynomial,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::parameter(format!("unknown family kind {s:?}")))
    }
}

/// Deterministic member of a random family.
pub fn random_family(kind: FamilyKind, n: usize, seed: u64) -> Result<AnalyticFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(kind.stream());
    let angle = |rng: &mut ChaCha8Rng| 2.0 * PI * rng.random::<f64>();
    Ok(match kind {
        FamilyKind::ClusteredBlaschke => {
            let modulus = 1.0 - 1.0 / n.max(1) as f64;
            let zeros = (0..n).map(|_| Complex64::from_polar(modulus, angle(&mut rng))).collect();
            BlaschkeProduct::new(zeros)?.into()
        }
        FamilyKind::UniformBlaschke => {
            let zeros = (0..n)
                .map(|_| {
                    let r = rng.random::<f64>().sqrt();
                    Complex64::from_polar(r, angle(&mut rng))
                })
                .collect();
            BlaschkeProduct::new(zeros)?.into()
        }
        FamilyKind::RandomPolynomial => {
            let scale = std::f64::consts::FRAC_1_SQRT_2;
            let mut coeffs: Vec<Complex64> = (0..=n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * scale
                })
                .collect();
            if coeffs[n].norm() < 1e-12 {
                coeffs[n] = Complex64::new(1.0, 0.0);
            }
            Polynomial::new(coeffs).into()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustered_moduli_forced() {
        let f = random_family(FamilyKind::ClusteredBlaschke, 4, 1).unwrap();
        let AnalyticFunction::Blaschke(b) = &f else { panic!() };
        assert_eq!(b.degree(), 4);
        assert!(b.zeros().iter().all(|a| (a.norm() - 0.75).abs() < 1e-15));
    }

    #[test]
    fn deterministic_in_seed() {
        for kind in [FamilyKind::ClusteredBlaschke, FamilyKind::UniformBlaschke, FamilyKind::RandomPolynomial] {
            assert_eq!(random_family(kind, 16, 9).unwrap(), random_family(kind, 16, 9).unwrap());
            assert_ne!(random_family(kind, 16, 9).unwrap(), random_family(kind, 16, 10).unwrap());
        }
    }

    #[test]
    fn random_polynomial_degree() {
        let f = random_family(FamilyKind::RandomPolynomial, 8, 7).unwrap();
        assert_eq!(f.degree(), 8);
    }

    #[test]
    fn kind_names_roundtrip() {
        for kind in [FamilyKind::ClusteredBlaschke, FamilyKind::UniformBlaschke, FamilyKind::RandomPolynomial] {
            assert_eq!(kind.name().parse::<FamilyKind>().unwrap(), kind);
        }
        assert!("gaussian".parse::<FamilyKind>().is_err());
    }
}
