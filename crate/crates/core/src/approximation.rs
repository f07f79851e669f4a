//! Polynomial approximation in H², the dyadic approximation scheme, the
//! lacunary coefficient test and the Littlewood-type counterexample.
//!
//! Best rational approximation is not computable; the polynomial error `E_n`
//! is used throughout as its upper bound.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::functions::{LacunarySeries, Polynomial};
use crate::norms::{self, GridOverrides};
use crate::quadrature::{self, band_integral, CircleIntegrand, DiskQuadrature, Part};
use crate::{sum, AnalyticFunction, Error, Result};

/// Largest stored exponent.
pub const MAX_SUPPORT: u64 = 1 << 20;
/// `2^{2^k_max}` must stay within 2^16.
pub const MAX_TRACE_LEVEL: u32 = 4;
/// Direct summation limit of [`dyadic_block_sum`] (upper limit `2^{2^4}`).
pub const DYADIC_DIRECT_MAX: u32 = 4;

/// Taylor coefficients, either dense or supported on `z^{2^k}`, plus the
/// H² mass of anything not stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum CoeffFunction {
    Dense { coeffs: Vec<Complex64>, tail_mass_sq: f64 },
    /// `(k, a_k)` for the term `a_k z^{2^k}`, `k` strictly increasing.
    Lacunary { terms: Vec<(u32, Complex64)>, tail_mass_sq: f64 },
}

impl CoeffFunction {
    pub fn dense(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::dense_with_tail(coeffs, 0.0)
    }

    pub fn dense_with_tail(coeffs: Vec<Complex64>, tail_mass_sq: f64) -> Result<Self> {
        if coeffs.len() as u64 > MAX_SUPPORT + 1 {
            return Err(Error::parameter(format!("{} coefficients exceed the 2^20 support cap", coeffs.len())));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !(tail_mass_sq >= 0.0 && tail_mass_sq.is_finite()) {
            return Err(Error::parameter("coefficients and tail mass must be finite"));
        }
        Ok(CoeffFunction::Dense { coeffs, tail_mass_sq })
    }

    /// `a_k = q^k` for `k ≤ n`, with the exact tail mass beyond.
    pub fn geometric(q: f64, n: usize) -> Result<Self> {
        if !(q.abs() < 1.0) {
            return Err(Error::parameter(format!("|q| < 1 required, got {q}")));
        }
        let coeffs = (0..=n).map(|k| Complex64::new(q.powi(k as i32), 0.0)).collect();
        let tail = q.abs().powi(2 * (n as i32 + 1)) / (1.0 - q * q);
        Self::dense_with_tail(coeffs, tail)
    }

    pub fn lacunary(terms: Vec<(u32, Complex64)>, tail_mass_sq: f64) -> Result<Self> {
        if terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::parameter("lacunary indices must be strictly increasing"));
        }
        if terms.last().is_some_and(|t| (1u64 << t.0.min(63)) > MAX_SUPPORT) {
            return Err(Error::parameter("lacunary exponent exceeds the 2^20 support cap"));
        }
        if terms.iter().any(|t| !t.1.is_finite()) || !(tail_mass_sq >= 0.0 && tail_mass_sq.is_finite()) {
            return Err(Error::parameter("coefficients and tail mass must be finite"));
        }
        Ok(CoeffFunction::Lacunary { terms, tail_mass_sq })
    }

    pub fn zero() -> Self {
        CoeffFunction::Dense { coeffs: vec![], tail_mass_sq: 0.0 }
    }

    pub fn from_lacunary_series(s: &LacunarySeries) -> Result<Self> {
        Self::lacunary(s.terms().to_vec(), 0.0)
    }

    pub fn tail_mass_sq(&self) -> f64 {
        match self {
            CoeffFunction::Dense { tail_mass_sq, .. } | CoeffFunction::Lacunary { tail_mass_sq, .. } => *tail_mass_sq,
        }
    }

    /// `(exponent, coefficient)` pairs of the stored nonzero terms.
    pub fn entries(&self) -> Vec<(u64, Complex64)> {
        match self {
            CoeffFunction::Dense { coeffs, .. } => coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.norm() != 0.0)
                .map(|(k, &c)| (k as u64, c))
                .collect(),
            CoeffFunction::Lacunary { terms, .. } => terms.iter().map(|&(k, c)| (1u64 << k, c)).collect(),
        }
    }

    /// Largest stored exponent with a nonzero coefficient.
    pub fn support(&self) -> u64 {
        self.entries().last().map_or(0, |e| e.0)
    }

    /// `‖f‖²_{H²}` including the unstored tail.
    pub fn mass_sq(&self) -> f64 {
        let stored: Vec<f64> = self.entries().iter().map(|e| e.1.norm_sqr()).collect();
        sum::pairwise(&stored) + self.tail_mass_sq()
    }

    /// Coefficients of the truncation `f_n` (exponents `≤ n`).
    pub fn truncation(&self, n: u64) -> Vec<Complex64> {
        let top = self.support().min(n) as usize;
        let mut out = vec![Complex64::new(0.0, 0.0); top + 1];
        for (k, c) in self.entries() {
            if k <= n {
                out[k as usize] = c;
            }
        }
        out
    }

    /// `k ↦ |a_k|` when every stored exponent is a power of two `2^k`, `k ≥ 1`.
    pub fn lacunary_moduli(&self) -> Option<Vec<(u32, f64)>> {
        self.entries()
            .into_iter()
            .map(|(e, c)| (e >= 2 && e.is_power_of_two()).then(|| (e.trailing_zeros(), c.norm())))
            .collect()
    }

    /// The stored part as an analytic function.
    pub fn to_function(&self) -> Result<AnalyticFunction> {
        match self {
            CoeffFunction::Dense { coeffs, .. } => Ok(Polynomial::new(coeffs.clone()).into()),
            CoeffFunction::Lacunary { terms, .. } if terms.is_empty() => {
                Ok(AnalyticFunction::constant(Complex64::new(0.0, 0.0)))
            }
            CoeffFunction::Lacunary { terms, .. } => Ok(LacunarySeries::new(terms.clone())?.into()),
        }
    }
}

/// `E_n(f, H²) = (Σ_{k>n} |a_k|²)^{1/2}`, exact since truncation is the
/// orthogonal projection onto polynomials of degree `≤ n`.
pub fn best_poly_approx_h2(f: &CoeffFunction, n: u64) -> f64 {
    let beyond: Vec<f64> = f.entries().iter().filter(|e| e.0 > n).map(|e| e.1.norm_sqr()).collect();
    (sum::pairwise(&beyond) + f.tail_mass_sq()).sqrt()
}

/// `E_n` for `n = 0..=upto`, via suffix sums.
fn h2_errors(f: &CoeffFunction, upto: u64) -> Vec<f64> {
    let mut out = vec![0.0; upto as usize + 1];
    let entries = f.entries();
    let mut acc = f.tail_mass_sq();
    let mut idx = entries.len();
    for n in (0..=upto).rev() {
        while idx > 0 && entries[idx - 1].0 > n {
            idx -= 1;
            acc += entries[idx].1.norm_sqr();
        }
        out[n as usize] = acc.max(0.0).sqrt();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockMethod {
    Direct,
    Integral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicBlock {
    pub m: u32,
    pub value: f64,
    pub method: BlockMethod,
    /// `value / 2^{m/2}`.
    pub ratio: f64,
}

/// `Σ_{n=2^{2^{m−1}}}^{2^{2^m}} 1/(n √log n)`: summed directly for `m ≤ 4`,
/// otherwise `2(√log b − √log a)` from the integral.
pub fn dyadic_block_sum(m: u32) -> Result<DyadicBlock> {
    if m == 0 || m > 1000 {
        return Err(Error::parameter(format!("block index m = {m} outside 1..=1000")));
    }
    let (value, method) = if m <= DYADIC_DIRECT_MAX {
        let a = 1u64 << (1u64 << (m - 1));
        let b = 1u64 << (1u64 << m);
        let terms: Vec<f64> = (a..=b).map(|n| 1.0 / (n as f64 * (n as f64).ln().sqrt())).collect();
        (sum::pairwise(&terms), BlockMethod::Direct)
    } else {
        let la = 2f64.powi(m as i32 - 1) * LN_2;
        let lb = 2f64.powi(m as i32) * LN_2;
        (2.0 * (lb.sqrt() - la.sqrt()), BlockMethod::Integral)
    };
    Ok(DyadicBlock { m, value, method, ratio: value / 2f64.powf(m as f64 / 2.0) })
}

/// A positive nonincreasing `φ`, evaluated at `x = 2^k` through `k` so that
/// huge arguments do not overflow.
#[derive(Clone)]
pub struct Phi {
    name: String,
    at_log2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Phi").field(&self.name).finish()
    }
}

impl Phi {
    /// From a function of `x`; arguments beyond `f64` range become `+∞`.
    pub fn new(name: impl Into<String>, phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Phi { name: name.into(), at_log2: Arc::new(move |k| phi(k.exp2())) }
    }

    /// `1/log(x + 2)`.
    pub fn inv_log() -> Self {
        Phi { name: "1/log(x+2)".into(), at_log2: Arc::new(|k| 1.0 / ln_2k_plus(k, 2.0)) }
    }

    /// `1/√log(x + 2)`.
    pub fn inv_sqrt_log() -> Self {
        Phi { name: "1/sqrt(log(x+2))".into(), at_log2: Arc::new(|k| 1.0 / ln_2k_plus(k, 2.0).sqrt()) }
    }

    /// `1/log log(x + 16)`.
    pub fn inv_log_log() -> Self {
        Phi { name: "1/log(log(x+16))".into(), at_log2: Arc::new(|k| 1.0 / ln_2k_plus(k, 16.0).ln()) }
    }

    pub fn constant(c: f64) -> Self {
        Phi { name: format!("{c}"), at_log2: Arc::new(move |_| c) }
    }

    pub fn builtins() -> Vec<Phi> {
        vec![Phi::inv_log(), Phi::inv_sqrt_log(), Phi::inv_log_log()]
    }

    pub fn by_name(name: &str) -> Result<Phi> {
        match name {
            "inv-log" => Ok(Phi::inv_log()),
            "inv-sqrt-log" => Ok(Phi::inv_sqrt_log()),
            "inv-log-log" => Ok(Phi::inv_log_log()),
            "one" => Ok(Phi::constant(1.0)),
            _ => Err(Error::parameter(format!(
                "unknown phi {name:?} (inv-log, inv-sqrt-log, inv-log-log, one)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `φ(2^k)`.
    pub fn at_log2(&self, k: f64) -> f64 {
        (self.at_log2)(k)
    }

    pub fn at(&self, x: f64) -> f64 {
        self.at_log2(x.log2())
    }
}

/// `log(2^k + c)` without forming `2^k`.
fn ln_2k_plus(k: f64, c: f64) -> f64 {
    if k < 60.0 {
        (k.exp2() + c).ln()
    } else {
        k * LN_2 + (c * (-k).exp2()).ln_1p()
    }
}

/// Weight sequences for the inverse-theorem series.
#[derive(Clone, Debug)]
pub enum Weight {
    /// `1/(n √log n)`.
    LogSqrt,
    /// `n^{−1/p}`.
    Power(f64),
    /// `φ(n)/(n √log n)`.
    Phi(Phi),
}

impl Weight {
    fn at(&self, n: f64) -> f64 {
        match self {
            Weight::LogSqrt => 1.0 / (n * n.ln().sqrt()),
            Weight::Power(p) => n.powf(-1.0 / p),
            Weight::Phi(phi) => phi.at(n) / (n * n.ln().sqrt()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Weight::LogSqrt => "1/(n sqrt(log n))".into(),
            Weight::Power(p) => format!("n^(-1/{p})"),
            Weight::Phi(phi) => format!("{}/(n sqrt(log n))", phi.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum TailModel {
    /// increments `≈ C ρ^x`
    Geometric { rho: f64 },
    /// increments `≈ C x^{−s}`
    Power { s: f64 },
}

/// Fitted exponent `s` must exceed this to call a power-law tail summable.
pub const POWER_CONVERGENCE: f64 = 1.01;
/// At or below this, a well-fitted power-law tail is called divergent.
pub const POWER_DIVERGENCE: f64 = 1.001;
/// Largest admissible log-scale residual of a tail fit.
pub const TAIL_RESIDUAL: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiagnosis {
    /// What the term index is (`n`, or the dyadic block `k` of `n ∈ [2^k, 2^{k+1})`).
    pub index: String,
    pub weight: String,
    pub terms: usize,
    /// `(index, S)` at powers of two and at the last index.
    pub partial_sums: Vec<(f64, f64)>,
    pub sum: f64,
    pub model: Option<TailModel>,
    pub residual: Option<f64>,
    pub extrapolated: Option<f64>,
    pub verdict: Verdict,
}

fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).abs()).fold(0.0, f64::max);
    (slope, icpt, res)
}

/// Diagnoses `Σ t_i` from its terms at increasing indices `x_i`.
///
/// The last half of the positive terms is fitted to `ρ^x` and to `x^{−s}`,
/// keeping the smaller log residual. Converges when the kept model has
/// `ρ < 1` or `s > 1.01` with residual below 0.1; diverges when it has
/// `ρ ≥ 1` or `s ≤ 1.001` with such a residual, or when the partial sums
/// exceed ten times the first term; otherwise inconclusive.
pub fn diagnose_series(index: &str, weight: &str, terms: &[(f64, f64)]) -> SeriesDiagnosis {
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    let mut comp = 0.0;
    let mut next_mark = 1usize;
    for (i, &(x, t)) in terms.iter().enumerate() {
        // Kahan summation over up to 2^20 terms
        let y = t - comp;
        let s = acc + y;
        comp = (s - acc) - y;
        acc = s;
        if i + 1 == next_mark || i + 1 == terms.len() {
            partial_sums.push((x, acc));
            next_mark *= 2;
        }
    }
    let mut out = SeriesDiagnosis {
        index: index.into(),
        weight: weight.into(),
        terms: terms.len(),
        partial_sums,
        sum: acc,
        model: None,
        residual: None,
        extrapolated: None,
        verdict: Verdict::Inconclusive,
    };
    let positive: Vec<(f64, f64)> = terms.iter().copied().filter(|t| t.1 > 0.0).collect();
    if positive.is_empty() || terms.last().is_some_and(|t| t.1 == 0.0) {
        // finitely many nonzero terms
        out.verdict = Verdict::Converges;
        out.extrapolated = Some(acc);
        return out;
    }
    let window = &positive[positive.len() / 2..];
    if window.len() >= 4 {
        let xs: Vec<f64> = window.iter().map(|t| t.0).collect();
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = window.iter().map(|t| t.1.ln()).collect();
        let (gs, _, gres) = line_fit(&xs, &ly);
        let (ps, _, pres) = line_fit(&lx, &ly);
        let (last_x, last_t) = *window.last().unwrap();
        let (model, residual) = if gres <= pres {
            (TailModel::Geometric { rho: gs.exp() }, gres)
        } else {
            (TailModel::Power { s: -ps }, pres)
        };
        out.model = Some(model);
        out.residual = Some(residual);
        if residual < TAIL_RESIDUAL {
            match model {
                TailModel::Geometric { rho } if rho < 1.0 => {
                    out.verdict = Verdict::Converges;
                    out.extrapolated = Some(acc + last_t * rho / (1.0 - rho));
                }
                TailModel::Power { s } if s > POWER_CONVERGENCE => {
                    out.verdict = Verdict::Converges;
                    out.extrapolated = Some(acc + last_t * last_x / (s - 1.0));
                }
                TailModel::Geometric { rho } if rho >= 1.0 => out.verdict = Verdict::Diverges,
                TailModel::Power { s } if s <= POWER_DIVERGENCE => out.verdict = Verdict::Diverges,
                _ => {}
            }
        }
    }
    if out.verdict == Verdict::Inconclusive && acc > 10.0 * terms[0].1 && terms[0].1 > 0.0 {
        out.verdict = Verdict::Diverges;
    }
    out
}

/// `Σ_{n≥2} E_n(f, H²)·w(n)` up to the stored support. Lacunary functions,
/// whose `E_n` is constant on `[2^k, 2^{k+1})`, are condensed to one term per
/// dyadic block.
pub fn inverse_series_test(f: &CoeffFunction, weight: &Weight) -> SeriesDiagnosis {
    let top = f.support().max(2);
    let errs = h2_errors(f, top);
    match f {
        CoeffFunction::Dense { .. } => {
            let terms: Vec<(f64, f64)> = (2..=top).map(|n| (n as f64, errs[n as usize] * weight.at(n as f64))).collect();
            diagnose_series("n", &weight.describe(), &terms)
        }
        CoeffFunction::Lacunary { .. } => {
            let kmax = 63 - top.leading_zeros();
            let terms: Vec<(f64, f64)> = (1..=kmax)
                .map(|k| {
                    let lo = 1u64 << k;
                    let hi = (1u64 << (k + 1)).min(top + 1);
                    let ws: Vec<f64> = (lo..hi).map(|n| errs[n as usize] * weight.at(n as f64)).collect();
                    (k as f64, sum::pairwise(&ws))
                })
                .collect();
            diagnose_series("dyadic k", &weight.describe(), &terms)
        }
    }
}

/// `(1/2π)`-normalized circle mean of `|f|`.
struct ValueModulus<'a>(&'a AnalyticFunction);

impl CircleIntegrand for ValueModulus<'_> {
    fn circle_mean(&self, r: f64, m: usize) -> Result<f64> {
        quadrature::circle_power_mean(self.0, Part::Value, r, 1.0, m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaLacRow {
    pub k: u32,
    pub coeff: f64,
    /// `2^{−k}|a_k|`.
    pub weighted: f64,
    pub weighted_partial: f64,
    pub abs_partial: f64,
    /// `∫_{1−2^{−k} ≤ |z| ≤ 1−2^{−k−1}} |f| dA`, for `k ≤ 12`.
    pub annulus: Option<f64>,
    /// `(1/2π)·annulus·2^{−k}(2^k+2)/(r₁^{2^k+2} − r₀^{2^k+2})`, a rigorous upper bound for `2^{−k}|a_k|`.
    pub bound: Option<f64>,
    /// `(1/2π)·annulus·(1−2^{−k})^{−2^k}`, the bound with only the `r^{2^k}` factor compensated.
    pub compensated: Option<f64>,
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaLacReport {
    pub rows: Vec<LemmaLacRow>,
    pub weighted_sum: f64,
    pub abs_sum: f64,
    pub all_hold: bool,
}

pub const LEMMA_LAC_MAX_K: u32 = 12;

/// Partial sums of `Σ 2^{−k}|a_k|` and `Σ|a_k|` for `f = Σ a_k z^{2^k}`,
/// with the annulus estimate of each `2^{−k}|a_k|` for `k ≤ 12`.
pub fn lemma_lac_test(f: &CoeffFunction) -> Result<LemmaLacReport> {
    let moduli = f
        .lacunary_moduli()
        .ok_or_else(|| Error::parameter("coefficients are not supported on exponents 2^k, k >= 1"))?;
    let func = f.to_function()?;
    let quad = DiskQuadrature::for_function(&func, 0.0)?;
    let kmax = moduli.last().map_or(0, |m| m.0);
    let mut rows = Vec::new();
    let (mut wsum, mut asum) = (0.0, 0.0);
    let mut all_hold = true;
    for k in 1..=kmax {
        let a = moduli.iter().find(|m| m.0 == k).map_or(0.0, |m| m.1);
        let w = (-(k as f64)).exp2() * a;
        wsum += w;
        asum += a;
        let (mut annulus, mut bound, mut compensated, mut holds) = (None, None, None, None);
        if k <= LEMMA_LAC_MAX_K {
            let r0 = 1.0 - (-(k as f64)).exp2();
            let r1 = 1.0 - (-(k as f64) - 1.0).exp2();
            let i = band_integral(&ValueModulus(&func), &quad, r0, r1)?;
            let e = (1u64 << k) as f64 + 2.0;
            let b = i / (2.0 * PI) * (-(k as f64)).exp2() * e / (r1.powf(e) - r0.powf(e));
            let ok = w <= b * (1.0 + 1e-9) + 1e-300;
            all_hold &= ok;
            annulus = Some(i);
            bound = Some(b);
            compensated = Some(i / (2.0 * PI) * r0.powf(-((1u64 << k) as f64)));
            holds = Some(ok);
        }
        rows.push(LemmaLacRow {
            k,
            coeff: a,
            weighted: w,
            weighted_partial: wsum,
            abs_partial: asum,
            annulus,
            bound,
            compensated,
            holds,
        });
    }
    Ok(LemmaLacReport { rows, weighted_sum: wsum, abs_sum: asum, all_hold })
}

/// `ψ₀(b) − ψ₀(a) = Σ_{k=a}^{b−1} 1/k` for integers `1 ≤ a ≤ b` (stored as `f64`).
pub fn harmonic(a: f64, b: f64) -> f64 {
    digamma_diff(a, b, |x| 1.0 / x, |x| {
        let x2 = x * x;
        x.ln() - 0.5 / x - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2) - 1.0 / (252.0 * x2 * x2 * x2)
    })
}

/// `Σ_{k=a}^{b−1} 1/k²`.
pub fn inverse_square_sum(a: f64, b: f64) -> f64 {
    // −ψ₁ is an antiderivative of the summand under forward differences
    digamma_diff(a, b, |x| 1.0 / (x * x), |x| {
        let x2 = x * x;
        -(1.0 / x + 0.5 / x2 + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x) + 1.0 / (42.0 * x2 * x2 * x2 * x))
    })
}

const DIRECT_LIMIT: f64 = 1e4;

fn digamma_diff(a: f64, b: f64, term: impl Fn(f64) -> f64, antider: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut s = 0.0;
    let mut k = a;
    let direct_end = b.min(DIRECT_LIMIT.max(a));
    while k < direct_end {
        s += term(k);
        k += 1.0;
    }
    if k < b {
        s += if b / k < 1.0 + 1e-6 {
            // midpoint rule is exact enough on a relatively short span
            (b - k) * term(0.5 * (k + b))
        } else {
            antider(b) - antider(k)
        };
    }
    s
}

/// Rigorous upper bound for `Σ_{k=a}^{b−1} φ(2^k)/k` with `φ` nonincreasing:
/// direct terms up to `10^4`, then geometric sub-blocks bounded by their first value.
fn phi_series_upper(phi: &Phi, a: f64, b: f64) -> f64 {
    let mut s = 0.0;
    let mut k = a;
    while k < b && k < DIRECT_LIMIT {
        s += phi.at_log2(k) / k;
        k += 1.0;
    }
    while k < b {
        let next = (k * (1.0 + 1.0 / 256.0)).ceil().min(b);
        s += phi.at_log2(k) * harmonic(k, next);
        k = next;
    }
    s
}

/// Block `[start, end)` of constant level in the counterexample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiBlock {
    pub j: u32,
    pub start: f64,
    pub end: f64,
    pub level: f64,
    /// `φ(2^{start})`, at most `2^{−j}`.
    pub phi_at_start: f64,
    /// `level·Σ_{block} 1/k`.
    pub divergent_contribution: f64,
    /// Upper bound for `level·Σ_{block} φ(2^k)/k`.
    pub convergent_contribution: f64,
    pub extended: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub phi: String,
    /// `ψ` on `[1, K_1)` equals the first block level.
    pub prefix_end: f64,
    pub blocks: Vec<PsiBlock>,
    /// `Σ_{k<K_{j+1}} ψ(k)/k` after each block.
    pub divergent_partial_sums: Vec<f64>,
    /// Upper bounds on `Σ_{k<K_{j+1}} ψ(k)φ(2^k)/k` after each block.
    pub convergent_partial_sums: Vec<f64>,
    /// `Σ_{k ≥ K_{j+1}} ψ(k)φ(2^k)/k ≤ 2^{−j}` after block `j`.
    pub convergent_tail_bounds: Vec<f64>,
    /// Upper bound for `Σ (ψ(j)/j)² = ‖f‖²_{H²}`.
    pub h2_norm_sq: f64,
    /// Upper bound for `Σ E_n(f,H²) φ(n)/(n √log n)`.
    pub weighted_series_bound: f64,
    pub weighted_series: SeriesDiagnosis,
    /// `Σ ψ(k)/k = Σ|a_k|`, one term per `k`.
    pub lemma_series: SeriesDiagnosis,
    /// Largest `k` stored in the returned coefficient function.
    pub stored_terms: u32,
    pub certificates: Vec<Certificate>,
    pub notes: Vec<String>,
}

impl CounterexampleReport {
    pub fn all_pass(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }
}

/// Indices beyond this are not probed.
pub const PROBE_LIMIT: f64 = 1e300;
/// Per-`k` series terms are generated up to this index.
const SERIES_TERMS: u32 = 1 << 20;
const STORED_TERMS: u32 = 20;

/// Smallest integer `K ≥ lo` with `φ(2^K) ≤ target`.
fn first_index_below(phi: &Phi, target: f64, lo: f64) -> Option<f64> {
    let ok = |k: f64| phi.at_log2(k) <= target;
    if ok(lo) {
        return Some(lo);
    }
    let mut bad = lo;
    let mut hi = (lo * 2.0).max(lo + 1.0);
    while !ok(hi) {
        if hi >= PROBE_LIMIT {
            return None;
        }
        bad = hi;
        hi = (hi * 2.0).min(PROBE_LIMIT);
    }
    while hi - bad > 1.0 {
        let mid = (0.5 * (bad + hi)).floor();
        if mid <= bad || mid >= hi {
            break;
        }
        if ok(mid) {
            hi = mid;
        } else {
            bad = mid;
        }
    }
    Some(hi)
}

/// Smallest integer `b ≥ b0` with `c·H(a, b) ≥ 1`.
fn extend_block(a: f64, b0: f64, c: f64) -> Option<f64> {
    let reached = |b: f64| c * harmonic(a, b) >= 1.0;
    if reached(b0) {
        return Some(b0);
    }
    let mut lo = b0;
    let mut hi = b0 * 2.0;
    while !reached(hi) {
        if hi >= PROBE_LIMIT {
            return None;
        }
        lo = hi;
        hi = (hi * 2.0).min(PROBE_LIMIT);
    }
    while hi - lo > 1.0 {
        let mid = (0.5 * (lo + hi)).floor();
        if mid <= lo || mid >= hi {
            break;
        }
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

struct Psi<'a> {
    blocks: &'a [PsiBlock],
}

impl Psi<'_> {
    /// Beyond the constructed blocks the last level is an upper bound.
    fn at(&self, k: f64) -> f64 {
        self.blocks.iter().find(|b| k < b.end).map_or(self.blocks.last().unwrap().level, |b| b.level)
    }

    /// `Σ_{j ≥ k} ψ(j)²/j²`; beyond the blocks bounded via the last level.
    fn square_tail(&self, k: f64) -> f64 {
        let first = self.blocks[0].level;
        let mut s = first * first * inverse_square_sum(k, self.blocks[0].start);
        for b in self.blocks {
            s += b.level * b.level * inverse_square_sum(k.max(b.start), b.end);
        }
        let last = self.blocks.last().unwrap();
        let from = k.max(last.end);
        s + last.level * last.level / (from - 1.0)
    }
}

/// Builds `f = Σ ψ(j)/j z^{2^j}` with `ψ` piecewise constant on blocks
/// `[K_j, K_{j+1})`: `K_j` is the least index with `φ(2^{K_j}) ≤ 2^{−j}` and
/// `K_j ≥ K_{j−1}²`; the level is `c_j = min(c_{j−1}, 1/Σ_{block}1/k)`, and the
/// block is lengthened until `c_j·Σ_{block}1/k ≥ 1`.
///
/// The returned coefficients stop at `z^{2^20}`; the H² mass of the rest is
/// carried as tail mass.
pub fn littlewood_counterexample(phi: &Phi, j_blocks: u32) -> Result<(CoeffFunction, CounterexampleReport)> {
    if j_blocks < 3 {
        return Err(Error::parameter(format!("at least 3 blocks required, got {j_blocks}")));
    }
    let probe = [1.0, 2.0, 4.0, 16.0, 64.0];
    if let Some(k) = probe.iter().find(|&&k| !(phi.at_log2(k) > 0.0 && phi.at_log2(k).is_finite())) {
        return Err(Error::parameter(format!("phi must be positive and finite, phi(2^{k}) = {}", phi.at_log2(*k))));
    }
    let stuck = |j: u32| {
        Error::Construction(format!(
            "phi({}) does not fall below 2^-{j} for indices up to {PROBE_LIMIT:e}; block {j} cannot start",
            phi.name()
        ))
    };
    let mut start = first_index_below(phi, 0.5, 2.0).ok_or_else(|| stuck(1))?;
    let prefix_end = start;
    let mut blocks: Vec<PsiBlock> = Vec::new();
    let mut level = f64::INFINITY;
    for j in 1..=j_blocks {
        let min_end = (start * start).max(start + 1.0);
        if min_end > PROBE_LIMIT {
            return Err(Error::Construction(format!("block {j} starting at {start:e} exceeds the probed index range")));
        }
        let end0 = first_index_below(phi, (-(j as f64) - 1.0).exp2(), min_end).ok_or_else(|| stuck(j + 1))?;
        let h0 = harmonic(start, end0);
        level = level.min(1.0 / h0);
        let end = extend_block(start, end0, level)
            .ok_or_else(|| Error::Construction(format!("block {j} cannot reach unit mass")))?;
        let h = harmonic(start, end);
        blocks.push(PsiBlock {
            j,
            start,
            end,
            level,
            phi_at_start: phi.at_log2(start),
            divergent_contribution: level * h,
            convergent_contribution: level * phi_series_upper(phi, start, end),
            extended: end > end0,
        });
        start = end;
    }
    let psi = Psi { blocks: &blocks };
    let c1 = blocks[0].level;

    let prefix_div = c1 * harmonic(1.0, prefix_end);
    let prefix_conv = c1 * phi_series_upper(phi, 1.0, prefix_end);
    let mut divergent_partial_sums = Vec::new();
    let mut convergent_partial_sums = Vec::new();
    let (mut d, mut c) = (prefix_div, prefix_conv);
    for b in &blocks {
        d += b.divergent_contribution;
        c += b.convergent_contribution;
        divergent_partial_sums.push(d);
        convergent_partial_sums.push(c);
    }
    let convergent_tail_bounds: Vec<f64> = blocks.iter().map(|b| (-(b.j as f64)).exp2()).collect();
    let h2_norm_sq = psi.square_tail(1.0);

    // stored part: exponents 2^k, k ≤ 20
    let terms: Vec<(u32, Complex64)> =
        (1..=STORED_TERMS).map(|k| (k, Complex64::new(psi.at(k as f64) / k as f64, 0.0))).collect();
    let tail = psi.square_tail(STORED_TERMS as f64 + 1.0);
    let f = CoeffFunction::lacunary(terms, tail)?;

    // weighted E_n series, one term per dyadic block [2^k, 2^{k+1})
    let dyadic_weight = |k: u32| -> f64 {
        let lo = 1u64 << k;
        let ws: Vec<f64> = (lo..2 * lo).map(|n| Weight::Phi(phi.clone()).at(n as f64)).collect();
        sum::pairwise(&ws)
    };
    let majorant = (LN_2 + (-(STORED_TERMS as f64) - 1.0).exp2()) / LN_2.sqrt();
    let mut weighted_terms = Vec::with_capacity(SERIES_TERMS as usize);
    for k in 1..=SERIES_TERMS {
        let kf = k as f64;
        let t = if k <= STORED_TERMS {
            psi.square_tail(kf + 1.0).sqrt() * dyadic_weight(k)
        } else {
            psi.at(kf) * phi.at_log2(kf) / kf * majorant
        };
        weighted_terms.push((kf, t));
    }
    let exact_part: f64 = weighted_terms[..STORED_TERMS as usize].iter().map(|t| t.1).sum();
    let last_end = blocks.last().unwrap().end;
    let rest = majorant
        * (psi_phi_upper(phi, &psi, STORED_TERMS as f64 + 1.0, last_end) + (-(j_blocks as f64)).exp2());
    let weighted_series_bound = exact_part + rest;
    let weighted_series = diagnose_series(
        "dyadic k",
        &Weight::Phi(phi.clone()).describe(),
        &weighted_terms,
    );

    let lemma_terms: Vec<(f64, f64)> = (1..=SERIES_TERMS).map(|k| (k as f64, psi.at(k as f64) / k as f64)).collect();
    let lemma_series = diagnose_series("k", "1", &lemma_terms);

    let jb = j_blocks as f64;
    let certs = vec![
        Certificate {
            name: "(i) each block adds >= 1 to sum psi(k)/k".into(),
            pass: blocks.iter().all(|b| b.divergent_contribution >= 1.0 - 1e-9)
                && divergent_partial_sums.last().copied().unwrap_or(0.0) >= jb * (1.0 - 1e-9),
            detail: format!("partial sum after {j_blocks} blocks: {:.6}", divergent_partial_sums.last().unwrap()),
        },
        Certificate {
            name: "(ii) block j adds <= 2^-j to sum psi(k) phi(2^k)/k".into(),
            pass: blocks.iter().all(|b| b.convergent_contribution <= (-(b.j as f64)).exp2()),
            detail: format!("total bound {:.6}", convergent_partial_sums.last().unwrap() + (-jb).exp2()),
        },
        Certificate {
            name: "(iii) sum (psi(j)/j)^2 < inf".into(),
            pass: h2_norm_sq.is_finite() && h2_norm_sq <= c1 * c1 * PI * PI / 6.0 * (1.0 + 1e-12),
            detail: format!("||f||_H2^2 <= {h2_norm_sq:.6}"),
        },
        Certificate {
            name: "(iv) phi-weighted E_n series converges".into(),
            pass: weighted_series_bound.is_finite() && weighted_series.verdict == Verdict::Converges,
            detail: format!("bound {weighted_series_bound:.6}, verdict {:?}", weighted_series.verdict),
        },
    ];
    let report = CounterexampleReport {
        phi: phi.name().to_string(),
        prefix_end,
        blocks,
        divergent_partial_sums,
        convergent_partial_sums,
        convergent_tail_bounds,
        h2_norm_sq,
        weighted_series_bound,
        weighted_series,
        lemma_series,
        stored_terms: STORED_TERMS,
        certificates: certs,
        notes: vec![
            "E_n(f, H^2) stands in for the best rational approximation error, which it bounds from above".into(),
            "beyond the constructed blocks psi is bounded by the last level".into(),
        ],
    };
    Ok((f, report))
}

/// Upper bound for `Σ_{k=a}^{b−1} ψ(k)φ(2^k)/k`.
fn psi_phi_upper(phi: &Phi, psi: &Psi<'_>, a: f64, b: f64) -> f64 {
    let mut s = 0.0;
    let first = psi.blocks[0].level;
    if a < psi.blocks[0].start {
        s += first * phi_series_upper(phi, a, psi.blocks[0].start.min(b));
    }
    for blk in psi.blocks {
        let lo = a.max(blk.start);
        let hi = b.min(blk.end);
        if lo < hi {
            s += blk.level * phi_series_upper(phi, lo, hi);
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// 0 for `f_2`, else the block `u_m = f_{2^{2^m}} − f_{2^{2^{m−1}}}`.
    pub m: u32,
    pub degree_from: u64,
    pub degree_to: u64,
    pub mass_sq: f64,
    pub hp_norm: f64,
    pub deriv_a1: f64,
    /// `2^{m/2} E_{2^{2^{m−1}}}`.
    pub bound_term: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicTrace {
    pub p: f64,
    pub k_max: u32,
    pub rows: Vec<TraceRow>,
    /// `|Σ block masses + remainder − ‖f‖²|`.
    pub reconciliation: f64,
    /// `‖f_{2^{2^{k_max}}}′‖_{A¹}`.
    pub truncated_deriv_a1: f64,
    pub triangle_rhs: f64,
    pub triangle_holds: bool,
}

/// The telescoping decomposition of the dyadic scheme with each block's
/// derivative norm against its bound term. The `H^p` norm of a block is
/// exact for `p = 2` and a boundary quadrature otherwise.
pub fn dyadic_scheme_trace(f: &CoeffFunction, p: f64, k_max: u32) -> Result<DyadicTrace> {
    if k_max == 0 || k_max > MAX_TRACE_LEVEL {
        return Err(Error::parameter(format!("k_max = {k_max} outside 1..={MAX_TRACE_LEVEL}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::parameter(format!("p = {p} must be finite and >= 1")));
    }
    let grid = GridOverrides::default();
    let block = |lo: Option<u64>, hi: u64| -> Vec<Complex64> {
        let mut c = f.truncation(hi);
        if let Some(lo) = lo {
            for v in c.iter_mut().take(lo as usize + 1) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        c
    };
    let measure = |coeffs: Vec<Complex64>| -> Result<(f64, f64, f64)> {
        let mass: f64 = sum::pairwise(&coeffs.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>());
        let poly = Polynomial::new(coeffs);
        if poly.degree() == 0 {
            let c0 = poly.coeffs().first().map_or(0.0, |c| c.norm());
            return Ok((mass, c0, 0.0));
        }
        let g: AnalyticFunction = poly.into();
        let hp = if p == 2.0 { mass.sqrt() } else { norms::hardy_norm(&g, p, &grid)?.value };
        let a1 = norms::bergman_deriv_norm(&g, 1.0, &grid)?.value;
        Ok((mass, hp, a1))
    };
    let mut rows = Vec::new();
    let (mass0, hp0, a10) = measure(block(None, 2))?;
    rows.push(TraceRow {
        m: 0,
        degree_from: 0,
        degree_to: 2,
        mass_sq: mass0,
        hp_norm: hp0,
        deriv_a1: a10,
        bound_term: None,
        ratio: None,
    });
    for m in 1..=k_max {
        let lo = 1u64 << (1u64 << (m - 1));
        let hi = 1u64 << (1u64 << m);
        let (mass, hp, a1) = measure(block(Some(lo), hi))?;
        let bound = 2f64.powf(m as f64 / 2.0) * best_poly_approx_h2(f, lo);
        rows.push(TraceRow {
            m,
            degree_from: lo,
            degree_to: hi,
            mass_sq: mass,
            hp_norm: hp,
            deriv_a1: a1,
            bound_term: Some(bound),
            ratio: (bound > 0.0).then(|| a1 / bound).or((a1 == 0.0).then_some(0.0)),
        });
    }
    let top = 1u64 << (1u64 << k_max);
    let remainder = best_poly_approx_h2(f, top).powi(2);
    let total: f64 = rows.iter().map(|r| r.mass_sq).sum::<f64>() + remainder;
    let reconciliation = (total - f.mass_sq()).abs();
    let truncated = measure(f.truncation(top))?.2;
    let triangle_rhs: f64 = rows.iter().map(|r| r.deriv_a1).sum();
    Ok(DyadicTrace {
        p,
        k_max,
        rows,
        reconciliation,
        truncated_deriv_a1: truncated,
        triangle_rhs,
        triangle_holds: truncated <= triangle_rhs * (1.0 + 1e-9),
    })
}

/// `‖P_m‖_{H^p} / ‖P_m‖_{H²}` for `P_m = Σ_{k=1}^m z^{2^k}`.
pub fn lacunary_hp_ratio(m: u32, p: f64) -> Result<f64> {
    if m == 0 || m > 20 {
        return Err(Error::parameter(format!("m = {m} outside 1..=20")));
    }
    let f: AnalyticFunction = LacunarySeries::ones(m).into();
    let hp = norms::hardy_norm(&f, p, &GridOverrides::default())?.value;
    Ok(hp / (m as f64).sqrt())
}
