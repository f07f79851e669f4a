//! Quadrature on circles and on the unit disk.
//!
//! Angular integrals use the trapezoid rule on equispaced angles, which is
//! spectrally accurate for smooth periodic integrands. Radial integrals use
//! geometric panels `[1 - 2^-j, 1 - 2^-(j+1)]` with Gauss–Legendre nodes; the
//! last panel `[1 - 2^-J, 1]` switches to Gauss–Jacobi so that the boundary
//! weight `(1 - r)^γ` is absorbed into the rule instead of being sampled.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::functions::AnalyticFunction;
use crate::sum;
use crate::{Error, Result};

/// Deepest geometric panel allowed; `1 - 2^-40` is still well resolved in binary64.
pub const MAX_DEPTH: u32 = 40;

/// A value together with a refinement-based error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    fn from_pair(coarse: f64, fine: f64) -> Self {
        Estimate {
            value: coarse,
            error: (coarse - fine).abs(),
        }
    }

    /// Applies a monotone map to both resolutions, keeping the error honest.
    pub fn map_pair(coarse: f64, fine: f64, g: impl Fn(f64) -> f64) -> Self {
        Estimate::from_pair(g(coarse), g(fine))
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut out = vec![(0.0, 0.0); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(n, x);
            dp = nf * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (p, p_prev) = legendre_pair(n, x);
                dp = nf * (x * p - p_prev) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = 0.0;
    }
    out
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss–Jacobi rule for `∫_{-1}^{1} (1-x)^α (1+x)^β g(x) dx` (Golub–Welsch).
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::parameter("Gauss-Jacobi needs at least one node"));
    }
    if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::parameter(format!(
            "Gauss-Jacobi exponents must exceed -1 (got alpha = {alpha}, beta = {beta})"
        )));
    }
    if alpha == 0.0 && beta == 0.0 {
        return Ok(gauss_legendre(n));
    }
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let k = i as f64;
        let denom = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
        jac[(i, i)] = if i == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / denom
        };
        if i + 1 < n {
            let k1 = k + 1.0;
            let s = 2.0 * k1 + ab;
            let off = (4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab)
                / (s * s * (s + 1.0) * (s - 1.0)))
                .sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let eig = jac.symmetric_eigen();
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rule)
}

/// Equispaced angular grid `t_j = 2πj/M` on the circle of radius `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleGrid {
    pub m: usize,
    pub r: f64,
}

impl CircleGrid {
    pub fn new(m: usize, r: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::parameter("angular grid needs M >= 1"));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::parameter(format!("radius {r} outside [0, 1]")));
        }
        Ok(CircleGrid { m, r })
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.m as f64
    }

    pub fn point(&self, j: usize) -> Complex64 {
        Complex64::from_polar(self.r, self.angle(j))
    }

    /// Trapezoid approximation of the normalized mean `(1/2π)∫ h(r e^{it}) dt`.
    pub fn mean(&self, h: impl Fn(Complex64) -> f64) -> f64 {
        let vals: Vec<f64> = (0..self.m).map(|j| h(self.point(j))).collect();
        sum::mean(&vals)
    }
}

/// Geometric radial panels with breakpoints `1 - 2^-j`, `j = 0..=depth`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialPanels {
    pub depth: u32,
    pub order: usize,
    pub terminal_jacobi: bool,
}

impl Default for RadialPanels {
    fn default() -> Self {
        RadialPanels {
            depth: MAX_DEPTH,
            order: 16,
            terminal_jacobi: true,
        }
    }
}

impl RadialPanels {
    pub fn new(depth: u32, order: usize) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::parameter(format!(
                "panel depth must be in 1..={MAX_DEPTH} (got {depth})"
            )));
        }
        if order == 0 {
            return Err(Error::parameter("panel order must be positive"));
        }
        Ok(RadialPanels {
            depth,
            order,
            terminal_jacobi: true,
        })
    }

    /// `[0, 1/2, 3/4, ..., 1 - 2^-J, 1]`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = (0..=self.depth).map(|j| 1.0 - (-(j as f64)).exp2()).collect();
        b.push(1.0);
        b
    }

    /// Nodes and weights for `∫_lo^hi g(r) (1 - r²)^γ dr`.
    ///
    /// A panel containing `lo` or `hi` is clipped rather than extended; the
    /// terminal panel keeps its Gauss–Jacobi treatment whenever it reaches `r = 1`.
    pub fn rule(&self, gamma: f64, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
        if gamma <= -1.0 || !gamma.is_finite() {
            return Err(Error::parameter(format!(
                "weight exponent {gamma} <= -1 is not integrable"
            )));
        }
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::parameter(format!(
                "radial range [{lo}, {hi}] not inside [0, 1]"
            )));
        }
        let legendre = gauss_legendre(self.order);
        let jacobi = if self.terminal_jacobi {
            Some(gauss_jacobi(self.order, gamma, 0.0)?)
        } else {
            None
        };
        let bps = self.breakpoints();
        let mut out = Vec::with_capacity(bps.len() * self.order);
        for (idx, win) in bps.windows(2).enumerate() {
            // 1 - a is an exact power of two for every breakpoint
            let gap_a = if idx == 0 { 1.0 } else { (-(idx as f64)).exp2() };
            let (a, b) = (win[0], win[1]);
            let (a, gap_a) = if lo > a { (lo, 1.0 - lo) } else { (a, gap_a) };
            let b = b.min(hi);
            if b <= a {
                continue;
            }
            let h = b - a;
            let terminal = b == 1.0;
            match (&jacobi, terminal) {
                (Some(jr), true) => {
                    // 1 - r = (1 - a)(1 - x)/2, so (1 - r)^γ factors out exactly
                    let scale = (0.5 * gap_a).powf(gamma + 1.0);
                    for &(x, w) in jr {
                        let r = a + 0.5 * h * (x + 1.0);
                        out.push((r, scale * w * (1.0 + r).powf(gamma)));
                    }
                }
                _ => {
                    for &(x, w) in &legendre {
                        let offset = 0.5 * h * (x + 1.0);
                        let r = a + offset;
                        let one_minus = gap_a - offset;
                        let weight = if gamma == 0.0 {
                            1.0
                        } else {
                            (one_minus * (1.0 + r)).powf(gamma)
                        };
                        out.push((r, 0.5 * h * w * weight));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Angular sample count as a function of radius.
///
/// `M(r) = clamp(2^⌈log₂(scale / (1 - reach·r))⌉, min, max)`, where `reach`
/// is the reciprocal of the distance to the nearest singularity of the
/// integrand (1 for polynomials). `min == max` gives a fixed count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularRule {
    pub min: usize,
    pub max: usize,
    pub scale: f64,
    pub reach: f64,
}

impl AngularRule {
    pub fn fixed(m: usize) -> Self {
        AngularRule {
            min: m,
            max: m,
            scale: 0.0,
            reach: 1.0,
        }
    }

    pub fn count(&self, r: f64) -> usize {
        if self.min >= self.max {
            return self.max;
        }
        let gap = (1.0 - self.reach * r).max(1e-300);
        let raw = (self.scale / gap).min(self.max as f64);
        let m = if raw <= 1.0 {
            1
        } else {
            (raw.ceil() as usize).next_power_of_two()
        };
        m.clamp(self.min, self.max)
    }

    pub fn doubled(&self) -> Self {
        AngularRule {
            min: self.min * 2,
            max: self.max * 2,
            scale: self.scale * 2.0,
            reach: self.reach,
        }
    }
}

/// Default angular count `max(4096, 64 n)` for a function of degree parameter `n`.
pub fn default_angular_count(n: f64) -> usize {
    let m = (64.0 * n.max(1.0)).min((1u64 << 26) as f64) as usize;
    m.max(4096).next_power_of_two()
}

/// Radial panels, angular rule and the boundary weight exponent γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskQuadrature {
    pub radial: RadialPanels,
    pub angular: AngularRule,
    pub weight_exponent: f64,
}

impl Default for DiskQuadrature {
    fn default() -> Self {
        DiskQuadrature {
            radial: RadialPanels::default(),
            angular: AngularRule::fixed(4096),
            weight_exponent: 0.0,
        }
    }
}

impl DiskQuadrature {
    pub fn new(radial: RadialPanels, angular: AngularRule, weight_exponent: f64) -> Result<Self> {
        if weight_exponent <= -1.0 || !weight_exponent.is_finite() {
            return Err(Error::parameter(format!(
                "weight exponent {weight_exponent} <= -1 is not integrable"
            )));
        }
        Ok(DiskQuadrature {
            radial,
            angular,
            weight_exponent,
        })
    }

    /// Grid adapted to `f`: the panel depth stops a few levels past the
    /// boundary length scale of `f`, and the angular count grows like
    /// `64/(1 - reach·r)` up to `max(4096, 64 n)`.
    pub fn for_function(f: &AnalyticFunction, weight_exponent: f64) -> Result<Self> {
        let scale = f.length_scale();
        let depth = ((scale.log2().ceil() as i64) + 6).clamp(8, MAX_DEPTH as i64) as u32;
        let radial = RadialPanels::new(depth, 16)?;
        let angular = AngularRule {
            min: 4096,
            max: default_angular_count(scale),
            scale: 64.0,
            reach: f.reach(),
        };
        DiskQuadrature::new(radial, angular, weight_exponent)
    }

    /// The comparison grid for error estimates: four more panels, twice the angles.
    pub fn refined(&self) -> Self {
        let mut radial = self.radial;
        radial.depth = (radial.depth + 4).min(MAX_DEPTH + 4);
        DiskQuadrature {
            radial,
            angular: self.angular.doubled(),
            weight_exponent: self.weight_exponent,
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.radial.order = order;
        self
    }

    pub fn with_angular_fixed(mut self, m: usize) -> Self {
        self.angular = AngularRule::fixed(m);
        self
    }

    pub fn with_angular_scale(mut self, scale: f64) -> Self {
        self.angular.scale = scale;
        self
    }
}

/// An integrand known through its normalized means over circles.
pub trait CircleIntegrand: Sync {
    /// `(1/2π)∫ h(r e^{it}) dt` sampled at `m` equispaced angles.
    fn circle_mean(&self, r: f64, m: usize) -> Result<f64>;
}

/// Wraps a pointwise integrand `h(z)`.
pub struct Pointwise<F>(pub F);

impl<F> CircleIntegrand for Pointwise<F>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    fn circle_mean(&self, r: f64, m: usize) -> Result<f64> {
        let grid = CircleGrid { m, r };
        let v = grid.mean(&self.0);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { radius: r })
        }
    }
}

/// `∫_{lo ≤ |z| ≤ hi} h(z) (1 - |z|²)^γ dA(z)`.
pub fn band_integral(
    h: &(impl CircleIntegrand + ?Sized),
    quad: &DiskQuadrature,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let nodes = quad.radial.rule(quad.weight_exponent, lo, hi)?;
    let terms: Result<Vec<f64>> = nodes
        .par_iter()
        .map(|&(r, w)| {
            let m = quad.angular.count(r);
            Ok(2.0 * PI * r * w * h.circle_mean(r, m)?)
        })
        .collect();
    Ok(sum::pairwise(&terms?))
}

/// `∫_𝔻 h(z) (1 - |z|²)^γ dA(z)`.
pub fn disk_integral(h: &(impl CircleIntegrand + ?Sized), quad: &DiskQuadrature) -> Result<f64> {
    band_integral(h, quad, 0.0, 1.0)
}

/// Integral over the annulus `r_min ≤ |z| < 1`.
pub fn annulus_integral(
    h: &(impl CircleIntegrand + ?Sized),
    quad: &DiskQuadrature,
    r_min: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&r_min) {
        return Err(Error::parameter(format!("annulus inner radius {r_min} not in [0, 1)")));
    }
    band_integral(h, quad, r_min, 1.0)
}

/// [`band_integral`] on `quad` and on `quad.refined()`.
pub fn band_integral_estimate(
    h: &(impl CircleIntegrand + ?Sized),
    quad: &DiskQuadrature,
    lo: f64,
    hi: f64,
) -> Result<Estimate> {
    let coarse = band_integral(h, quad, lo, hi)?;
    let fine = band_integral(h, &quad.refined(), lo, hi)?;
    Ok(Estimate::from_pair(coarse, fine))
}

pub fn disk_integral_estimate(
    h: &(impl CircleIntegrand + ?Sized),
    quad: &DiskQuadrature,
) -> Result<Estimate> {
    band_integral_estimate(h, quad, 0.0, 1.0)
}

/// Which quantity a circle mean is taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    Value,
    Derivative,
}

/// `(1/2π)∫₀^{2π} |g(r e^{it})|^p dt` with `g = f` or `g = f'`, plus the
/// change observed when `M` is doubled.
pub fn circle_mean(f: &AnalyticFunction, part: Part, r: f64, p: f64, m: usize) -> Result<Estimate> {
    if !(p > 0.0) {
        return Err(Error::parameter(format!("exponent p = {p} must be positive")));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::parameter(format!("radius {r} outside [0, 1]")));
    }
    let coarse = circle_power_mean(f, part, r, p, m)?;
    let fine = circle_power_mean(f, part, r, p, 2 * m)?;
    Ok(Estimate::from_pair(coarse, fine))
}

pub(crate) fn circle_power_mean(
    f: &AnalyticFunction,
    part: Part,
    r: f64,
    p: f64,
    m: usize,
) -> Result<f64> {
    let s = f.sample_circle(r, m);
    let src = match part {
        Part::Value => &s.values,
        Part::Derivative => &s.derivs,
    };
    let vals: Vec<f64> = src.iter().map(|v| pow_abs(v.norm(), p)).collect();
    let mean = sum::mean(&vals);
    if mean.is_finite() {
        Ok(mean)
    } else {
        Err(Error::NonFinite { radius: r })
    }
}

#[inline]
pub(crate) fn pow_abs(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::beta::beta;

    #[test]
    fn legendre_integrates_high_degree_monomials() {
        let rule = gauss_legendre(16);
        for k in 0..32 {
            let q: f64 = rule.iter().map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k = {k}: {q} vs {exact}");
        }
    }

    #[test]
    fn jacobi_matches_beta_moments() {
        // ∫_{-1}^{1} (1-x)^α (1+x)^k dx = 2^{α+k+1} B(α+1, k+1)
        for &alpha in &[-0.5, -0.1, 0.6, 1.5] {
            let rule = gauss_jacobi(16, alpha, 0.0).unwrap();
            for k in 0..20 {
                let q: f64 = rule.iter().map(|(x, w)| w * (1.0 + x).powi(k)).sum();
                let exact = 2f64.powf(alpha + k as f64 + 1.0) * beta(alpha + 1.0, k as f64 + 1.0);
                assert_relative_eq!(q, exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_rejects_nonintegrable_weight() {
        assert!(gauss_jacobi(8, -1.0, 0.0).unwrap_err().is_parameter());
    }

    #[test]
    fn trapezoid_exact_for_low_frequencies() {
        let m = 64;
        let grid = CircleGrid::new(m, 1.0).unwrap();
        for k in -(m as i64 - 1)..(m as i64) {
            let re = grid.mean(|z| z.powi(k as i32).re);
            let im = grid.mean(|z| z.powi(k as i32).im);
            let expect = if k == 0 { 1.0 } else { 0.0 };
            assert!((re - expect).abs() < 1e-13 && im.abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn panels_cover_unit_interval() {
        let panels = RadialPanels::default();
        let b = panels.breakpoints();
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 1.0);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        let rule = panels.rule(-0.5, 0.0, 1.0).unwrap();
        assert!(rule.iter().all(|&(_, w)| w > 0.0));
    }

    #[test]
    fn disk_area_is_pi() {
        let quad = DiskQuadrature::default();
        let v = disk_integral(&Pointwise(|_| 1.0), &quad.with_angular_fixed(8)).unwrap();
        assert_relative_eq!(v, PI, max_relative = 1e-12);
    }

    #[test]
    fn singular_weight_absorbed_by_terminal_panel() {
        let quad = DiskQuadrature::new(RadialPanels::default(), AngularRule::fixed(8), -0.5).unwrap();
        let v = disk_integral(&Pointwise(|_| 1.0), &quad).unwrap();
        assert_relative_eq!(v, 2.0 * PI, max_relative = 1e-12);
        let err = DiskQuadrature::new(RadialPanels::default(), AngularRule::fixed(8), -1.0);
        assert!(err.unwrap_err().is_parameter());
    }

    #[test]
    fn annulus_split_inside_terminal_panel() {
        let quad = DiskQuadrature::new(RadialPanels::new(10, 16).unwrap(), AngularRule::fixed(8), -0.3)
            .unwrap();
        let r_min = 1.0 - 0.3 * (-10f64).exp2();
        let h = Pointwise(|_| 1.0);
        let inner = band_integral(&h, &quad, 0.0, r_min).unwrap();
        let outer = annulus_integral(&h, &quad, r_min).unwrap();
        let full = disk_integral(&h, &quad).unwrap();
        assert_relative_eq!(inner + outer, full, max_relative = 1e-12);
        // exact: π ∫_{r_min²}^1 (1-u)^γ du = π (1-r_min²)^{γ+1}/(γ+1)
        let exact = PI * (1.0 - r_min * r_min).powf(0.7) / 0.7;
        assert_relative_eq!(outer, exact, max_relative = 1e-10);
    }

    #[test]
    fn angular_rule_is_monotone_and_clamped() {
        let rule = AngularRule {
            min: 256,
            max: 1 << 14,
            scale: 64.0,
            reach: 1.0,
        };
        let mut last = 0;
        for j in 0..40 {
            let r = 1.0 - (-(j as f64)).exp2();
            let m = rule.count(r);
            assert!(m >= last && m.is_power_of_two());
            last = m;
        }
        assert_eq!(rule.count(1.0), 1 << 14);
        assert_eq!(rule.count(0.0), 256);
    }
}
