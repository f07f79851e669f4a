//! Hardy, Bergman, Besov, Littlewood–Paley, Hayman and related functionals.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::functions::AnalyticFunction;
use crate::quadrature::{
    self, band_integral, circle_power_mean, default_angular_count, pow_abs,
    CircleIntegrand, DiskQuadrature, Estimate, Part, RadialPanels,
};
use crate::{sum, Error, Result, CONVENTIONS};

/// Zero-on-circle threshold for negative powers of `|f|`.
pub const ZERO_ON_CIRCLE: f64 = 1e-13;
/// Radius shift used when a zero-on-circle retry is requested.
pub const RADIUS_PERTURBATION: f64 = 1.0 / (1u64 << 30) as f64;

/// Optional overrides of the function-adapted default grids.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOverrides {
    pub depth: Option<u32>,
    pub order: Option<usize>,
    /// Fixed angular count on every circle.
    pub angular: Option<usize>,
    /// Angular scale `κ` in `M(r) = κ/(1 − reach·r)`.
    pub angular_scale: Option<f64>,
}

impl GridOverrides {
    pub fn disk(&self, f: &AnalyticFunction, gamma: f64) -> Result<DiskQuadrature> {
        let mut q = DiskQuadrature::for_function(f, gamma)?;
        if let Some(depth) = self.depth {
            q.radial = RadialPanels::new(depth, q.radial.order)?;
        }
        if let Some(order) = self.order {
            q.radial = RadialPanels::new(q.radial.depth, order)?;
        }
        if let Some(m) = self.angular {
            if m == 0 {
                return Err(Error::parameter("angular count must be positive"));
            }
            q = q.with_angular_fixed(m);
        }
        if let Some(scale) = self.angular_scale {
            if !(scale > 0.0) {
                return Err(Error::parameter("angular scale must be positive"));
            }
            q = q.with_angular_scale(scale);
        }
        Ok(q)
    }

    /// Samples on a single circle: `max(4096, 64 n)` unless fixed.
    pub fn circle_samples(&self, f: &AnalyticFunction) -> usize {
        self.angular.unwrap_or_else(|| default_angular_count(f.length_scale()))
    }
}

/// Grid used for a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Grid {
    Circle { radius: f64, samples: usize },
    Disk { quadrature: DiskQuadrature },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub functional: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub error_estimate: f64,
    pub grid: Grid,
    pub conventions: String,
    /// The integral before the outer root, e.g. `‖f‖^σ` for the Besov seminorm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_integral: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl NormReport {
    fn new(functional: &str, params: &[(&str, f64)], est: Estimate, grid: Grid) -> Self {
        NormReport {
            functional: functional.to_string(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            value: est.value,
            error_estimate: est.error,
            grid,
            conventions: CONVENTIONS.to_string(),
            raw_integral: None,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }
}

/// `|f'|^p |g|^p` (or `|f'|^p` without `g`) as a circle integrand.
pub struct DerivPower<'a> {
    pub f: &'a AnalyticFunction,
    pub g: Option<&'a AnalyticFunction>,
    pub p: f64,
}

impl<'a> DerivPower<'a> {
    pub fn new(f: &'a AnalyticFunction, p: f64) -> Self {
        DerivPower { f, g: None, p }
    }
}

impl CircleIntegrand for DerivPower<'_> {
    fn circle_mean(&self, r: f64, m: usize) -> Result<f64> {
        let Some(g) = self.g else {
            return circle_power_mean(self.f, Part::Derivative, r, self.p, m);
        };
        let df = self.f.sample_circle(r, m).derivs;
        let gv = g.sample_circle(r, m).values;
        let vals: Vec<f64> = df
            .iter()
            .zip(&gv)
            .map(|(d, v)| pow_abs(d.norm() * v.norm(), self.p))
            .collect();
        let mean = sum::mean(&vals);
        if mean.is_finite() {
            Ok(mean)
        } else {
            Err(Error::NonFinite { radius: r })
        }
    }
}

fn check_exponent(name: &str, p: f64, lo: f64) -> Result<()> {
    if p.is_finite() && p >= lo {
        Ok(())
    } else {
        Err(Error::parameter(format!("{name} = {p} must be >= {lo}")))
    }
}

/// Estimate of the `1/p`-th root.
fn root(coarse: f64, fine: f64, p: f64) -> Estimate {
    Estimate::map_pair(coarse, fine, |x| x.max(0.0).powf(1.0 / p))
}

/// `‖f‖_{H^p} = ((1/2π)∫|f(e^{it})|^p dt)^{1/p}`, with circle means at
/// `r = 0.5, 0.9, 1` as monotonicity diagnostics.
pub fn hardy_norm(f: &AnalyticFunction, p: f64, grid: &GridOverrides) -> Result<NormReport> {
    check_exponent("p", p, 1.0)?;
    let m = grid.circle_samples(f);
    let coarse = circle_power_mean(f, Part::Value, 1.0, p, m)?;
    let fine = circle_power_mean(f, Part::Value, 1.0, p, 2 * m)?;
    let mut rep = NormReport::new(
        "hardy",
        &[("p", p)],
        root(coarse, fine, p),
        Grid::Circle { radius: 1.0, samples: m },
    );
    rep.raw_integral = Some(coarse);
    let mut prev = 0.0;
    let mut monotone = true;
    for (key, r) in [("mean_r0.5", 0.5), ("mean_r0.9", 0.9)] {
        let v = circle_power_mean(f, Part::Value, r, p, m)?;
        monotone &= v >= prev * (1.0 - 1e-12);
        prev = v;
        rep.diagnostics.insert(key.into(), v);
    }
    monotone &= coarse >= prev * (1.0 - 1e-12);
    rep.diagnostics.insert("mean_r1".into(), coarse);
    rep.diagnostics.insert("monotone".into(), if monotone { 1.0 } else { 0.0 });
    Ok(rep)
}

fn area_report(
    name: &str,
    params: &[(&str, f64)],
    integrand: &impl CircleIntegrand,
    quad: DiskQuadrature,
    outer_root: f64,
) -> Result<NormReport> {
    let coarse = band_integral(integrand, &quad, 0.0, 1.0)?;
    let fine = band_integral(integrand, &quad.refined(), 0.0, 1.0)?;
    let mut rep = NormReport::new(
        name,
        params,
        root(coarse, fine, outer_root),
        Grid::Disk { quadrature: quad },
    );
    rep.raw_integral = Some(coarse);
    rep.diagnostics.insert("raw_error_estimate".into(), (coarse - fine).abs());
    Ok(rep)
}

/// `(∫_𝔻 |f'|^p dA)^{1/p}`.
pub fn bergman_deriv_norm(f: &AnalyticFunction, p: f64, grid: &GridOverrides) -> Result<NormReport> {
    check_exponent("p", p, 1.0)?;
    let quad = grid.disk(f, 0.0)?;
    let name = if p == 1.0 { "a1-deriv" } else { "ap-deriv" };
    area_report(name, &[("p", p)], &DerivPower::new(f, p), quad, p)
}

/// `(∫_𝔻 |f'|^σ (1 − |z|²)^{(1−α)σ−1} dA)^{1/σ}`.
pub fn besov_seminorm(
    f: &AnalyticFunction,
    sigma: f64,
    alpha: f64,
    grid: &GridOverrides,
) -> Result<NormReport> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::parameter(format!("sigma = {sigma} must lie in (0, 2)")));
    }
    if !(alpha < 1.0) || !alpha.is_finite() {
        return Err(Error::parameter(format!(
            "alpha = {alpha} must be < 1 for an integrable weight"
        )));
    }
    let gamma = (1.0 - alpha) * sigma - 1.0;
    let quad = grid.disk(f, gamma)?;
    let mut rep = area_report(
        "besov",
        &[("sigma", sigma), ("alpha", alpha)],
        &DerivPower::new(f, sigma),
        quad,
        sigma,
    )?;
    rep.diagnostics.insert("weight_exponent".into(), gamma);
    Ok(rep)
}

/// Radial nodes and weights for `∫₀¹ g(r)(1 − r) dr`.
fn square_function_rule(panels: &RadialPanels) -> Result<Vec<(f64, f64)>> {
    Ok(panels
        .rule(0.0, 0.0, 1.0)?
        .into_iter()
        .map(|(r, w)| (r, w * (1.0 - r)))
        .collect())
}

fn square_function_panels(f: &AnalyticFunction, grid: &GridOverrides) -> Result<RadialPanels> {
    Ok(grid.disk(f, 0.0)?.radial)
}

/// `S(f)(e^{it}) = (∫₀¹ (1 − r)|f'(r e^{it})|² dr)^{1/2}`.
pub fn square_function(f: &AnalyticFunction, t: f64, grid: &GridOverrides) -> Result<f64> {
    let panels = square_function_panels(f, grid)?;
    let terms: Vec<f64> = square_function_rule(&panels)?
        .into_iter()
        .map(|(r, w)| w * f.eval_deriv(num_complex::Complex64::from_polar(r, t)).norm_sqr())
        .collect();
    let s2 = sum::pairwise(&terms);
    if s2.is_finite() {
        Ok(s2.max(0.0).sqrt())
    } else {
        Err(Error::NonFinite { radius: 1.0 })
    }
}

/// `S(f)²` on `m` equispaced angles.
fn square_function_sq_grid(f: &AnalyticFunction, panels: &RadialPanels, m: usize) -> Result<Vec<f64>> {
    let rule = square_function_rule(panels)?;
    let rows: Vec<Vec<f64>> = rule
        .par_iter()
        .map(|&(r, w)| {
            f.sample_circle(r, m)
                .derivs
                .iter()
                .map(|d| w * d.norm_sqr())
                .collect()
        })
        .collect();
    let mut col = vec![0.0; rows.len()];
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        for (c, row) in col.iter_mut().zip(&rows) {
            *c = row[j];
        }
        let s = sum::pairwise(&col);
        if !s.is_finite() {
            return Err(Error::NonFinite { radius: 1.0 });
        }
        out.push(s);
    }
    Ok(out)
}

fn lp_norm_pow(f: &AnalyticFunction, p: f64, panels: &RadialPanels, m: usize) -> Result<f64> {
    let s2 = square_function_sq_grid(f, panels, m)?;
    let vals: Vec<f64> = s2.iter().map(|&v| v.max(0.0).powf(p / 2.0)).collect();
    Ok(sum::mean(&vals))
}

/// `‖S(f)‖_{L^p} = ((1/2π)∫ S(f)(e^{it})^p dt)^{1/p}`.
pub fn littlewood_paley_norm(f: &AnalyticFunction, p: f64, grid: &GridOverrides) -> Result<NormReport> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::parameter(format!("p = {p} must be positive")));
    }
    let panels = square_function_panels(f, grid)?;
    let m = grid.angular.unwrap_or_else(|| default_angular_count(f.degree() as f64));
    let coarse = lp_norm_pow(f, p, &panels, m)?;
    let mut fine_panels = panels;
    fine_panels.depth = (panels.depth + 4).min(quadrature::MAX_DEPTH + 4);
    let fine = lp_norm_pow(f, p, &fine_panels, 2 * m)?;
    let mut quad = DiskQuadrature::default().with_angular_fixed(m);
    quad.radial = panels;
    let mut rep = NormReport::new("lp", &[("p", p)], root(coarse, fine, p), Grid::Disk { quadrature: quad });
    rep.raw_integral = Some(coarse);
    rep.notes.push("radial weight (1 - r), angular mean normalized by 1/(2*pi)".into());
    Ok(rep)
}

/// Result of a Hayman left-hand side evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaymanLhs {
    pub value: f64,
    /// Radius actually used (differs from the request after a perturbation).
    pub radius: f64,
    pub perturbed: bool,
}

fn hayman_raw(f: &AnalyticFunction, r: f64, lambda: f64, m: usize) -> Result<f64> {
    let s = f.sample_circle(r, m);
    let min_mod = s.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if lambda < 2.0 && min_mod < ZERO_ON_CIRCLE {
        return Err(Error::ZeroOnCircle { radius: r, min_modulus: min_mod });
    }
    let vals: Vec<f64> = s
        .values
        .iter()
        .zip(&s.derivs)
        .map(|(v, d)| {
            let d2 = d.norm_sqr();
            if d2 == 0.0 {
                0.0
            } else {
                d2 * v.norm().powf(lambda - 2.0)
            }
        })
        .collect();
    let mean = sum::mean(&vals);
    if mean.is_finite() {
        Ok(2.0 * PI * mean)
    } else {
        Err(Error::NonFinite { radius: r })
    }
}

/// `∫₀^{2π} |f'(r e^{it})|² |f(r e^{it})|^{λ−2} dt` (unnormalized `dt`).
///
/// With `perturb`, a zero on the circle triggers one retry at `r − 2^{-30}`
/// and the report records the radius used.
pub fn hayman_lhs(f: &AnalyticFunction, r: f64, lambda: f64, m: usize, perturb: bool) -> Result<HaymanLhs> {
    if !(lambda > 0.0 && lambda <= 2.0) {
        return Err(Error::parameter(format!("lambda = {lambda} must lie in (0, 2]")));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::parameter(format!("radius {r} outside [0, 1]")));
    }
    if m == 0 {
        return Err(Error::parameter("angular count must be positive"));
    }
    match hayman_raw(f, r, lambda, m) {
        Ok(value) => Ok(HaymanLhs { value, radius: r, perturbed: false }),
        Err(Error::ZeroOnCircle { .. }) if perturb => {
            let shifted = if r >= RADIUS_PERTURBATION { r - RADIUS_PERTURBATION } else { r + RADIUS_PERTURBATION };
            let value = hayman_raw(f, shifted, lambda, m)?;
            Ok(HaymanLhs { value, radius: shifted, perturbed: true })
        }
        Err(e) => Err(e),
    }
}

/// `M(r, f) = max_{|z|=r} |f(z)|`: grid maximum refined by golden-section search.
pub fn max_modulus(f: &AnalyticFunction, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::parameter(format!("radius {r} outside [0, 1]")));
    }
    let m = ((8.0 * f.length_scale()).min((1u64 << 22) as f64) as usize)
        .max(4096)
        .next_power_of_two();
    let s = f.sample_circle(r, m);
    let (best, grid_max) = s
        .values
        .iter()
        .map(|v| v.norm())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
    if !grid_max.is_finite() {
        return Err(Error::NonFinite { radius: r });
    }
    let h = 2.0 * PI / m as f64;
    let g = |t: f64| f.eval(num_complex::Complex64::from_polar(r, t)).norm();
    let t0 = best as f64 * h;
    let (mut a, mut b) = (t0 - h, t0 + h);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..80 {
        if b - a < 1e-14 {
            break;
        }
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + phi * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - phi * (b - a);
            g1 = g(x1);
        }
    }
    Ok(grid_max.max(g1).max(g2))
}

/// `∫₀¹ (∫₀^{2π} |f'(r e^{it})| dt)^p dr`.
pub fn pommerenke_mixed_norm(f: &AnalyticFunction, p: f64, grid: &GridOverrides) -> Result<NormReport> {
    check_exponent("p", p, 1.0)?;
    let quad = grid.disk(f, 0.0)?;
    let eval = |q: &DiskQuadrature| -> Result<f64> {
        let rule = q.radial.rule(0.0, 0.0, 1.0)?;
        let terms: Result<Vec<f64>> = rule
            .par_iter()
            .map(|&(r, w)| {
                let mean = circle_power_mean(f, Part::Derivative, r, 1.0, q.angular.count(r))?;
                Ok(w * (2.0 * PI * mean).powf(p))
            })
            .collect();
        Ok(sum::pairwise(&terms?))
    };
    let coarse = eval(&quad)?;
    let fine = eval(&quad.refined())?;
    let mut rep = NormReport::new(
        "pommerenke",
        &[("p", p)],
        Estimate::map_pair(coarse, fine, |x| x),
        Grid::Disk { quadrature: quad },
    );
    rep.notes.push("inner angular integral unnormalized (dt), outer radial dr".into());
    Ok(rep)
}

/// For lacunary series `‖f‖_BMOA ≍ ‖f‖_{H²}`; this returns the H² norm.
pub fn bmoa_surrogate(f: &AnalyticFunction, grid: &GridOverrides) -> Result<NormReport> {
    if f.as_lacunary().is_none() {
        return Err(Error::parameter(format!(
            "BMOA surrogate needs a lacunary series, got {}",
            f.kind()
        )));
    }
    let mut rep = hardy_norm(f, 2.0, grid)?;
    rep.functional = "bmoa-surrogate".into();
    rep.params.clear();
    rep.notes.push("surrogate: H^2 norm, comparable to the BMOA norm for lacunary series only".into());
    Ok(rep)
}
