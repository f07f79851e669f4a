use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::multipole::LogField;
use super::{circle_points, CircleSamples};
use crate::{Error, Result};

/// Below this distance to a zero the logarithmic-derivative sum cancels badly.
const NEAR_ZERO: f64 = 1e-8;

#[derive(Clone, Debug)]
struct Factor {
    a: Complex64,
    a_conj: Complex64,
    /// `|a|/a`, or 1 at the origin.
    unit: Complex64,
    mod2: f64,
    origin: bool,
}

impl Factor {
    fn new(a: Complex64) -> Self {
        let origin = a == Complex64::new(0.0, 0.0);
        Factor {
            a,
            a_conj: a.conj(),
            unit: if origin { Complex64::new(1.0, 0.0) } else { a.norm() / a },
            mod2: a.norm_sqr(),
            origin,
        }
    }

    fn value(&self, z: Complex64) -> Complex64 {
        if self.origin {
            z
        } else {
            self.unit * (self.a - z) / (1.0 - self.a_conj * z)
        }
    }

    fn deriv(&self, z: Complex64) -> Complex64 {
        if self.origin {
            Complex64::new(1.0, 0.0)
        } else {
            let d = 1.0 - self.a_conj * z;
            self.unit * (self.mod2 - 1.0) / (d * d)
        }
    }

    /// `b'/b` at `z`.
    fn log_deriv(&self, z: Complex64) -> Complex64 {
        if self.origin {
            1.0 / z
        } else {
            (self.mod2 - 1.0) / ((1.0 - self.a_conj * z) * (self.a - z))
        }
    }
}

/// Finite Blaschke product `B(z) = Π_j b_{a_j}(z)` with
/// `b_a(z) = (|a|/a)(a − z)/(1 − āz)` and `b_0(z) = z`.
#[derive(Clone, Debug)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
    factors: Vec<Factor>,
    field: OnceLock<Arc<LogField>>,
}

impl PartialEq for BlaschkeProduct {
    fn eq(&self, other: &Self) -> bool {
        self.zeros == other.zeros
    }
}

impl BlaschkeProduct {
    /// Degree and number of zeros at which circle sampling switches to the
    /// multipole evaluator.
    const FIELD_MIN_DEGREE: usize = 64;
    const FIELD_MIN_SAMPLES: usize = 256;

    pub fn new(zeros: Vec<Complex64>) -> Result<Self> {
        if let Some(a) = zeros.iter().find(|a| !a.is_finite() || a.norm() >= 1.0) {
            return Err(Error::parameter(format!(
                "Blaschke zero {a} must lie in the open unit disk"
            )));
        }
        let factors = zeros.iter().copied().map(Factor::new).collect();
        Ok(BlaschkeProduct {
            zeros,
            factors,
            field: OnceLock::new(),
        })
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.factors
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, f| acc * f.value(z))
    }

    /// `(B(z), B'(z))`.
    pub fn eval_both(&self, z: Complex64) -> (Complex64, Complex64) {
        if self.factors.iter().any(|f| (z - f.a).norm() < NEAR_ZERO) {
            return self.eval_both_product_rule(z);
        }
        let mut b = Complex64::new(1.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for f in &self.factors {
            b *= f.value(z);
            s += f.log_deriv(z);
        }
        (b, b * s)
    }

    /// `B' = Σ_j b_j' Π_{i≠j} b_i` via prefix and suffix products.
    fn eval_both_product_rule(&self, z: Complex64) -> (Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        let vals: Vec<Complex64> = self.factors.iter().map(|f| f.value(z)).collect();
        let mut suffix = vec![one; vals.len() + 1];
        for j in (0..vals.len()).rev() {
            suffix[j] = suffix[j + 1] * vals[j];
        }
        let mut prefix = one;
        let mut deriv = Complex64::new(0.0, 0.0);
        for (j, f) in self.factors.iter().enumerate() {
            deriv += prefix * f.deriv(z) * suffix[j + 1];
            prefix *= vals[j];
        }
        (suffix[0], deriv)
    }

    fn field(&self) -> &LogField {
        self.field.get_or_init(|| Arc::new(LogField::new(&self.zeros)))
    }

    pub(super) fn sample_circle(&self, r: f64, m: usize) -> CircleSamples {
        if self.degree() < Self::FIELD_MIN_DEGREE || m < Self::FIELD_MIN_SAMPLES {
            return CircleSamples::pointwise(r, m, |z| self.eval_both(z));
        }
        let field = self.field();
        let (values, derivs) = circle_points(r, m)
            .map(|z| field.eval_both(z).unwrap_or_else(|| self.eval_both(z)))
            .unzip();
        CircleSamples { r, values, derivs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{random_family, AnalyticFunction, FamilyKind};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_zero_examples() {
        let b = BlaschkeProduct::new(vec![c(0.0, 0.0)]).unwrap();
        let z = c(0.3, 0.4);
        assert_eq!(b.eval(z), z);
        assert!((b.eval_both(z).1 - c(1.0, 0.0)).norm() < 1e-15);

        let b = BlaschkeProduct::new(vec![c(0.5, 0.0)]).unwrap();
        let d = b.eval_both(c(1.0, 0.0)).1;
        assert!((d.norm() - 3.0).abs() < 1e-14);
        assert!((b.eval(c(0.0, 0.0)).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_outside_disk() {
        assert!(BlaschkeProduct::new(vec![c(1.0, 0.0)]).unwrap_err().is_parameter());
    }

    #[test]
    fn derivative_near_zero_uses_product_rule() {
        let a = c(0.3, -0.2);
        let b = BlaschkeProduct::new(vec![a, c(-0.5, 0.1), c(0.0, 0.7)]).unwrap();
        let near = a + c(1e-10, 0.0);
        let away = a + c(1e-6, 0.0);
        let (_, d_near) = b.eval_both(near);
        let (_, d_away) = b.eval_both(away);
        assert!((d_near - d_away).norm() < 1e-5 * d_away.norm());
        let (_, d_exact) = b.eval_both_product_rule(away);
        assert!((d_exact - d_away).norm() < 1e-10 * d_away.norm());
    }

    #[test]
    fn boundary_unimodular_and_derivative_bounds() {
        for kind in [FamilyKind::ClusteredBlaschke, FamilyKind::UniformBlaschke] {
            let f = random_family(kind, 200, 3).unwrap();
            let AnalyticFunction::Blaschke(b) = &f else { unreachable!() };
            for j in 0..512 {
                let z = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 512.0);
                assert!((b.eval(z).norm() - 1.0).abs() < 1e-10);
            }
            let r: f64 = 0.97;
            for j in 0..512 {
                let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / 512.0);
                assert!(b.eval_both(z).1.norm() <= 1.0 / (1.0 - r * r) + 1e-9);
            }
        }
    }

    #[test]
    fn multipole_sampling_matches_direct() {
        for kind in [FamilyKind::ClusteredBlaschke, FamilyKind::UniformBlaschke] {
            let f = random_family(kind, 300, 11).unwrap();
            let AnalyticFunction::Blaschke(b) = &f else { unreachable!() };
            for &r in &[0.0, 0.5, 0.99, 0.9999, 1.0] {
                let s = b.sample_circle(r, 1024);
                for (j, z) in circle_points(r, 1024).enumerate() {
                    let (v, d) = b.eval_both(z);
                    assert!((s.values[j] - v).norm() <= 1e-9 * v.norm().max(1e-300) + 1e-300, "r = {r}");
                    assert!((s.derivs[j] - d).norm() <= 1e-9 * d.norm() + 1e-300, "r = {r}");
                }
            }
        }
    }
}
