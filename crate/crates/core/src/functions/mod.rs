//! Exactly representable analytic functions on the closed unit disk.
//!
//! Every kind evaluates `f` and `f'` pointwise and samples both on whole
//! circles. Circle sampling is where the quadrature spends its time, so the
//! dense kinds use an FFT of the folded coefficient sequence and large
//! Blaschke products go through a multipole evaluator.

mod blaschke;
mod family;
mod multipole;
mod spec;

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::roots;
use crate::{Error, Result};

pub use blaschke::BlaschkeProduct;
pub use family::{random_family, FamilyKind};
pub use spec::FunctionSpec;

/// Largest FFT length used for coefficient extraction.
pub const MAX_TAYLOR_SAMPLES: usize = 1 << 22;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_inverse(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
}

fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

fn circle_points(r: f64, m: usize) -> impl Iterator<Item = Complex64> {
    (0..m).map(move |j| Complex64::from_polar(r, 2.0 * PI * j as f64 / m as f64))
}

/// `f` and `f'` at `r e^{2πij/m}`, `j = 0..m`.
#[derive(Clone, Debug)]
pub struct CircleSamples {
    pub r: f64,
    pub values: Vec<Complex64>,
    pub derivs: Vec<Complex64>,
}

impl CircleSamples {
    fn pointwise(r: f64, m: usize, eval: impl Fn(Complex64) -> (Complex64, Complex64)) -> Self {
        let (values, derivs) = circle_points(r, m).map(eval).unzip();
        CircleSamples { r, values, derivs }
    }

    /// Inverse FFT of bucketed monomials `Σ c_e z^e` with `z^e` folded mod `m`.
    fn from_folded(r: f64, mut values: Vec<Complex64>, mut derivs: Vec<Complex64>) -> Self {
        fft_inverse(&mut values);
        fft_inverse(&mut derivs);
        CircleSamples { r, values, derivs }
    }
}

/// Dense polynomial `a_0 + a_1 z + ... + a_d z^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Trailing zero coefficients are dropped; the zero polynomial keeps `[0]`.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = Complex64::new(1.0, 0.0);
        Polynomial { coeffs: c }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Horner for `(p(z), p'(z))`.
    pub fn eval_both(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::new(vec![]);
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    fn sample_circle(&self, r: f64, m: usize) -> CircleSamples {
        if m < 64 || self.degree() < 16 || r == 0.0 {
            return CircleSamples::pointwise(r, m, |z| self.eval_both(z));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut vals = vec![zero; m];
        let mut ders = vec![zero; m];
        let mut rp = 1.0; // r^j
        for (j, &c) in self.coeffs.iter().enumerate() {
            vals[j % m] += c * rp;
            if j + 1 < self.coeffs.len() {
                // derivative term (j+1) a_{j+1} z^j
                ders[j % m] += self.coeffs[j + 1] * ((j + 1) as f64 * rp);
            }
            rp *= r;
        }
        CircleSamples::from_folded(r, vals, ders)
    }
}

/// `Σ a_k z^{2^k}` over a sparse set of indices `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LacunarySeries {
    terms: Vec<(u32, Complex64)>,
}

impl LacunarySeries {
    /// Largest supported index: exponents up to `2^62`.
    pub const MAX_INDEX: u32 = 62;

    pub fn new(terms: Vec<(u32, Complex64)>) -> Result<Self> {
        if terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::parameter(
                "lacunary indices must be strictly increasing",
            ));
        }
        if let Some(&(k, _)) = terms.last() {
            if k > Self::MAX_INDEX {
                return Err(Error::parameter(format!(
                    "lacunary index {k} exceeds {}",
                    Self::MAX_INDEX
                )));
            }
        }
        if terms.iter().any(|(_, a)| !a.is_finite()) {
            return Err(Error::parameter("non-finite lacunary coefficient"));
        }
        Ok(LacunarySeries { terms })
    }

    /// `P_n(z) = Σ_{k=1}^{n} z^{2^k}`.
    pub fn ones(n: u32) -> Self {
        LacunarySeries {
            terms: (1..=n).map(|k| (k, Complex64::new(1.0, 0.0))).collect(),
        }
    }

    pub fn terms(&self) -> &[(u32, Complex64)] {
        &self.terms
    }

    /// Largest exponent `2^k` (0 for the empty series).
    pub fn degree(&self) -> u64 {
        self.terms.last().map_or(0, |&(k, _)| 1u64 << k)
    }

    pub fn h2_norm_sq(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Walks `z^{2^k}` by repeated squaring.
    pub fn eval_both(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut f = zero;
        let mut df = zero;
        let mut power = z; // z^{2^k}
        let mut k = 0;
        for &(idx, a) in &self.terms {
            while k < idx {
                power = power * power;
                k += 1;
            }
            f += a * power;
            let exp = (1u64 << idx) as f64;
            // z^{2^k - 1}
            let lower = if idx == 0 {
                Complex64::new(1.0, 0.0)
            } else if z == zero {
                zero
            } else {
                power / z
            };
            df += a * exp * lower;
        }
        (f, df)
    }

    fn sample_circle(&self, r: f64, m: usize) -> CircleSamples {
        if m < 64 || r == 0.0 {
            return CircleSamples::pointwise(r, m, |z| self.eval_both(z));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut vals = vec![zero; m];
        let mut ders = vec![zero; m];
        let modulus = m as u128;
        for &(k, a) in &self.terms {
            let e = 1u128 << k;
            let ef = e as f64;
            vals[(e % modulus) as usize] += a * r.powf(ef);
            let lower = e - 1;
            ders[(lower % modulus) as usize] += a * (ef * r.powf(lower as f64));
        }
        CircleSamples::from_folded(r, vals, ders)
    }
}

/// `N(z)/D(z)` with every zero of `D` outside the closed unit disk.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
    poles: Vec<Complex64>,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.coeffs().iter().all(|c| c.norm() == 0.0) {
            return Err(Error::parameter("rational denominator is identically zero"));
        }
        let found = roots::aberth(den.coeffs(), &roots::AberthOptions::default())?;
        if let Some(p) = found.roots.iter().find(|p| p.norm() <= 1.0) {
            return Err(Error::parameter(format!(
                "denominator vanishes at {p} inside the closed unit disk"
            )));
        }
        Ok(RationalFunction {
            num,
            den,
            poles: found.roots,
        })
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    pub fn eval_both(&self, z: Complex64) -> (Complex64, Complex64) {
        let (n, dn) = self.num.eval_both(z);
        let (d, dd) = self.den.eval_both(z);
        (n / d, (dn * d - n * dd) / (d * d))
    }
}

/// Pointwise product of factors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductFunction {
    factors: Vec<AnalyticFunction>,
}

impl ProductFunction {
    pub fn new(factors: Vec<AnalyticFunction>) -> Self {
        ProductFunction { factors }
    }

    pub fn factors(&self) -> &[AnalyticFunction] {
        &self.factors
    }

    pub fn eval_both(&self, z: Complex64) -> (Complex64, Complex64) {
        let parts: Vec<_> = self.factors.iter().map(|f| f.eval_both(z)).collect();
        combine_product(&parts)
    }
}

/// Product rule over `(f_i, f_i')` pairs without dividing by any factor.
fn combine_product(parts: &[(Complex64, Complex64)]) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let mut value = one;
    let mut deriv = Complex64::new(0.0, 0.0);
    for &(f, df) in parts {
        deriv = deriv * f + value * df;
        value *= f;
    }
    (value, deriv)
}

/// Tagged union of every representable function kind.
#[derive(Clone, Debug, PartialEq)]
pub enum AnalyticFunction {
    Polynomial(Polynomial),
    Lacunary(LacunarySeries),
    Blaschke(BlaschkeProduct),
    Rational(RationalFunction),
    Product(ProductFunction),
}

impl From<Polynomial> for AnalyticFunction {
    fn from(p: Polynomial) -> Self {
        AnalyticFunction::Polynomial(p)
    }
}

impl From<LacunarySeries> for AnalyticFunction {
    fn from(p: LacunarySeries) -> Self {
        AnalyticFunction::Lacunary(p)
    }
}

impl From<BlaschkeProduct> for AnalyticFunction {
    fn from(b: BlaschkeProduct) -> Self {
        AnalyticFunction::Blaschke(b)
    }
}

impl From<RationalFunction> for AnalyticFunction {
    fn from(r: RationalFunction) -> Self {
        AnalyticFunction::Rational(r)
    }
}

impl From<ProductFunction> for AnalyticFunction {
    fn from(p: ProductFunction) -> Self {
        AnalyticFunction::Product(p)
    }
}

impl AnalyticFunction {
    /// `z^n`.
    pub fn power(n: usize) -> Self {
        Polynomial::monomial(n).into()
    }

    pub fn constant(c: Complex64) -> Self {
        Polynomial::new(vec![c]).into()
    }

    /// `1/(1 - z/2)`.
    pub fn geometric_half() -> Self {
        RationalFunction::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[1.0, -0.5]))
            .expect("pole at z = 2")
            .into()
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AnalyticFunction::Polynomial(_) => "polynomial",
            AnalyticFunction::Lacunary(_) => "lacunary",
            AnalyticFunction::Blaschke(_) => "blaschke",
            AnalyticFunction::Rational(_) => "rational",
            AnalyticFunction::Product(_) => "product",
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            AnalyticFunction::Polynomial(p) => p.eval(z),
            AnalyticFunction::Blaschke(b) => b.eval(z),
            other => other.eval_both(z).0,
        }
    }

    pub fn eval_deriv(&self, z: Complex64) -> Complex64 {
        self.eval_both(z).1
    }

    pub fn eval_both(&self, z: Complex64) -> (Complex64, Complex64) {
        match self {
            AnalyticFunction::Polynomial(p) => p.eval_both(z),
            AnalyticFunction::Lacunary(l) => l.eval_both(z),
            AnalyticFunction::Blaschke(b) => b.eval_both(z),
            AnalyticFunction::Rational(r) => r.eval_both(z),
            AnalyticFunction::Product(p) => p.eval_both(z),
        }
    }

    /// `f` and `f'` on the circle `|z| = r` at `m` equispaced angles.
    pub fn sample_circle(&self, r: f64, m: usize) -> CircleSamples {
        match self {
            AnalyticFunction::Polynomial(p) => p.sample_circle(r, m),
            AnalyticFunction::Lacunary(l) => l.sample_circle(r, m),
            AnalyticFunction::Blaschke(b) => b.sample_circle(r, m),
            AnalyticFunction::Rational(q) => CircleSamples::pointwise(r, m, |z| q.eval_both(z)),
            AnalyticFunction::Product(p) => {
                let samples: Vec<_> = p.factors.iter().map(|f| f.sample_circle(r, m)).collect();
                let (values, derivs) = (0..m)
                    .map(|j| {
                        let parts: Vec<_> =
                            samples.iter().map(|s| (s.values[j], s.derivs[j])).collect();
                        combine_product(&parts)
                    })
                    .unzip();
                CircleSamples { r, values, derivs }
            }
        }
    }

    /// Valence bound `n`: polynomial degree, largest lacunary exponent,
    /// number of Blaschke zeros, rational degree; products add.
    pub fn degree(&self) -> u64 {
        match self {
            AnalyticFunction::Polynomial(p) => p.degree() as u64,
            AnalyticFunction::Lacunary(l) => l.degree(),
            AnalyticFunction::Blaschke(b) => b.degree() as u64,
            AnalyticFunction::Rational(r) => r.degree() as u64,
            AnalyticFunction::Product(p) => p.factors.iter().map(|f| f.degree()).sum(),
        }
    }

    /// Reciprocal distance-to-singularity used by the angular rule: 1 for
    /// polynomials, `max |a_j|` for Blaschke products, `1/min |pole|` for
    /// rational functions.
    pub fn reach(&self) -> f64 {
        match self {
            AnalyticFunction::Polynomial(_) | AnalyticFunction::Lacunary(_) => 1.0,
            AnalyticFunction::Blaschke(b) => b.zeros().iter().map(|a| a.norm()).fold(0.0, f64::max),
            AnalyticFunction::Rational(r) => r
                .poles()
                .iter()
                .map(|p| 1.0 / p.norm())
                .fold(0.0, f64::max),
            AnalyticFunction::Product(p) => p.factors.iter().map(|f| f.reach()).fold(0.0, f64::max),
        }
    }

    /// Radial length scale `1/δ` of boundary features, at least 1.
    pub fn length_scale(&self) -> f64 {
        let pole_scale = |reach: f64| {
            if reach < 1.0 {
                1.0 / (1.0 - reach)
            } else {
                1.0
            }
        };
        let s = match self {
            AnalyticFunction::Polynomial(_) | AnalyticFunction::Lacunary(_) => self.degree() as f64,
            AnalyticFunction::Blaschke(_) | AnalyticFunction::Rational(_) => {
                (self.degree() as f64).max(pole_scale(self.reach()))
            }
            AnalyticFunction::Product(p) => {
                p.factors.iter().map(|f| f.length_scale()).fold(1.0, f64::max)
            }
        };
        s.max(1.0)
    }

    pub fn as_lacunary(&self) -> Option<&LacunarySeries> {
        match self {
            AnalyticFunction::Lacunary(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            AnalyticFunction::Polynomial(p) => p.degree() == 0,
            AnalyticFunction::Lacunary(l) => l.terms().is_empty(),
            AnalyticFunction::Blaschke(b) => b.degree() == 0,
            AnalyticFunction::Rational(r) => r.num.degree() == 0 && r.den.degree() == 0,
            AnalyticFunction::Product(p) => p.factors.iter().all(|f| f.is_constant()),
        }
    }

    /// First `n` Taylor coefficients from an FFT of boundary samples.
    ///
    /// For functions in the disk algebra the boundary Fourier coefficients
    /// are the Taylor coefficients; at least `8n` samples are used, and
    /// enough to cover a finite degree without aliasing.
    pub fn taylor_coeffs(&self, n: usize) -> Result<Vec<Complex64>> {
        if n == 0 {
            return Ok(vec![]);
        }
        let mut samples = (8 * n).max(64);
        let deg = self.degree();
        if matches!(self, AnalyticFunction::Polynomial(_) | AnalyticFunction::Lacunary(_))
            && deg < MAX_TAYLOR_SAMPLES as u64
        {
            samples = samples.max(2 * (deg as usize + 1));
        } else if self.reach() < 1.0 {
            // geometric decay reach^k: aliasing below 1e-17 of the leading term
            let need = (-39.0 / self.reach().max(1e-300).ln()).ceil();
            if need.is_finite() && need > 0.0 {
                samples = samples.max((need as usize).min(MAX_TAYLOR_SAMPLES));
            }
        }
        let samples = samples.next_power_of_two();
        if samples > MAX_TAYLOR_SAMPLES {
            return Err(Error::parameter(format!(
                "{n} coefficients need {samples} boundary samples, above the {MAX_TAYLOR_SAMPLES} cap"
            )));
        }
        let mut buf = self.sample_circle(1.0, samples).values;
        if buf.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { radius: 1.0 });
        }
        fft_forward(&mut buf);
        let scale = 1.0 / samples as f64;
        Ok(buf.into_iter().take(n).map(|c| c * scale).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn polynomial_eval_examples() {
        let p = AnalyticFunction::power(2);
        assert!((p.eval(c(0.0, 1.0)) - c(-1.0, 0.0)).norm() < 1e-15);
        let q = Polynomial::from_real(&[2.0, 3.0, 0.0, 0.0]);
        assert_eq!(q.degree(), 1);
        assert_eq!(q.eval(c(0.0, 0.0)), c(2.0, 0.0));
        for n in [1usize, 5, 17] {
            let f = AnalyticFunction::power(n);
            let r: f64 = 0.7;
            assert_relative_eq!(f.eval_deriv(c(r, 0.0)).re, n as f64 * r.powi(n as i32 - 1), max_relative = 1e-14);
        }
    }

    #[test]
    fn lacunary_eval_examples() {
        let p3: AnalyticFunction = LacunarySeries::ones(3).into();
        assert_eq!(p3.eval(c(1.0, 0.0)), c(3.0, 0.0));
        assert_eq!(p3.degree(), 8);
        let z = c(0.3, -0.6);
        let dense = Polynomial::new({
            let mut v = vec![c(0.0, 0.0); 9];
            v[2] = c(1.0, 0.0);
            v[4] = c(1.0, 0.0);
            v[8] = c(1.0, 0.0);
            v
        });
        let (f, df) = p3.eval_both(z);
        let (g, dg) = dense.eval_both(z);
        assert!((f - g).norm() < 1e-15 && (df - dg).norm() < 1e-14);
        assert!(LacunarySeries::new(vec![(3, c(1.0, 0.0)), (2, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn fft_sampling_matches_pointwise() {
        let poly: AnalyticFunction = Polynomial::new((0..40).map(|k| c(1.0 / (k as f64 + 1.0), 0.3 * k as f64)).collect()).into();
        let lac: AnalyticFunction = LacunarySeries::new(vec![(0, c(0.5, 0.0)), (3, c(0.0, 1.0)), (9, c(2.0, -1.0))]).unwrap().into();
        for f in [poly, lac] {
            for &(r, m) in &[(0.9, 128usize), (1.0, 256), (0.5, 64)] {
                let s = f.sample_circle(r, m);
                for (j, z) in circle_points(r, m).enumerate() {
                    let (v, d) = f.eval_both(z);
                    assert!((s.values[j] - v).norm() < 1e-11 * (1.0 + v.norm()), "{} value", f.kind());
                    assert!((s.derivs[j] - d).norm() < 1e-10 * (1.0 + d.norm()), "{} deriv", f.kind());
                }
            }
        }
    }

    #[test]
    fn rational_rejects_pole_in_disk() {
        let bad = RationalFunction::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[1.0, -2.0]));
        assert!(bad.unwrap_err().is_parameter());
        let g = AnalyticFunction::geometric_half();
        assert_relative_eq!(g.eval(c(1.0, 0.0)).re, 2.0, max_relative = 1e-15);
        assert_relative_eq!(g.eval_deriv(c(0.0, 0.0)).re, 0.5, max_relative = 1e-15);
        assert_relative_eq!(g.reach(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn product_rule() {
        let f: AnalyticFunction = ProductFunction::new(vec![AnalyticFunction::power(2), AnalyticFunction::geometric_half()]).into();
        let z = c(0.4, 0.2);
        let g = 1.0 / (1.0 - z / 2.0);
        let (v, d) = f.eval_both(z);
        assert!((v - z * z * g).norm() < 1e-15);
        let expect = 2.0 * z * g + z * z * 0.5 * g * g;
        assert!((d - expect).norm() < 1e-14);
        assert_eq!(f.degree(), 3);
    }

    #[test]
    fn taylor_coefficient_examples() {
        let z3 = AnalyticFunction::power(3).taylor_coeffs(5).unwrap();
        for (k, a) in z3.iter().enumerate() {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((a - c(expect, 0.0)).norm() < 1e-14);
        }
        let g = AnalyticFunction::geometric_half().taylor_coeffs(21).unwrap();
        for (k, a) in g.iter().enumerate() {
            assert!((a - c((-(k as f64)).exp2(), 0.0)).norm() < 1e-14, "k = {k}");
        }
        let p2: AnalyticFunction = LacunarySeries::ones(2).into();
        let a = p2.taylor_coeffs(8).unwrap();
        for (k, v) in a.iter().enumerate() {
            let expect = if k == 2 || k == 4 { 1.0 } else { 0.0 };
            assert!((v - c(expect, 0.0)).norm() < 1e-14);
        }
        assert!(AnalyticFunction::power(2).taylor_coeffs(MAX_TAYLOR_SAMPLES).unwrap_err().is_parameter());
    }
}
