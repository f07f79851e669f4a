//! Sweeps that evaluate each inequality's ratio over a function family,
//! plus the Hayman witness search and the split-radius diagnostic.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fit::{fit_growth, Fixed, GrowthFit};
use crate::functions::{random_family, AnalyticFunction, FamilyKind, LacunarySeries};
use crate::norms::{self, DerivPower, GridOverrides};
use crate::quadrature::{self, band_integral, CircleIntegrand, DiskQuadrature, Part};
use crate::{sum, Error, Result};

/// Which inequality a sweep instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// `∫|f'| dA ≤ C √log(n+1) ‖f‖_{H^p}`.
    #[serde(rename = "1")]
    One,
    /// `∫|f'|^p dA ≤ C n^{p−1} ‖f‖^p_∞` and its `p = 1` form with `√log(n+1)`.
    #[serde(rename = "1-sup")]
    OneSup,
    /// Besov growth in the two regimes.
    #[serde(rename = "2")]
    Two,
    /// `∫|B' g| dA ≤ C √log(n+1) ‖g‖_{H^p}`.
    #[serde(rename = "3")]
    Three,
    /// `∫₀¹(∫|f'| dt)^p dr ≤ C n^{p/2} ‖f‖^p_{H^p}`.
    Pommerenke,
    /// `∫|f'(re^{it})| dt ≤ C n^{1/2} (1−r)^{−1/p} ‖f‖_{H^p}`.
    Lemma32,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::One => "1",
            Theorem::OneSup => "1-sup",
            Theorem::Two => "2",
            Theorem::Three => "3",
            Theorem::Pommerenke => "pommerenke",
            Theorem::Lemma32 => "lemma32",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Theorem::One, Theorem::OneSup, Theorem::Two, Theorem::Three, Theorem::Pommerenke, Theorem::Lemma32]
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::parameter(format!("unknown theorem {s:?}")))
    }
}

/// Sweep families. The parameter is the degree `n`, except for `lacunary`
/// where it is the number of terms `m` of `P_m` (degree `2^m`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Power,
    Lacunary,
    ClusteredBlaschke,
    UniformBlaschke,
    Constant,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Power => "power",
            Family::Lacunary => "lacunary",
            Family::ClusteredBlaschke => "clustered-blaschke",
            Family::UniformBlaschke => "uniform-blaschke",
            Family::Constant => "constant",
        }
    }

    /// `2^4..2^12`, or `m = 4..13` for lacunary polynomials.
    pub fn default_params(self) -> Vec<u64> {
        match self {
            Family::Lacunary => (4..=13).collect(),
            _ => (4..=12).map(|k| 1u64 << k).collect(),
        }
    }

    pub fn is_blaschke(self) -> bool {
        matches!(self, Family::ClusteredBlaschke | Family::UniformBlaschke | Family::Power)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Family::Power, Family::Lacunary, Family::ClusteredBlaschke, Family::UniformBlaschke, Family::Constant]
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::parameter(format!("unknown family {s:?}")))
    }
}

/// A family member with its certified valence bound.
#[derive(Clone, Debug)]
pub struct Member {
    pub f: AnalyticFunction,
    pub n: u64,
    /// Number of lacunary terms, when applicable.
    pub terms: Option<u64>,
}

pub fn family_member(family: Family, param: u64, seed: u64) -> Result<Member> {
    if param == 0 {
        return Err(Error::parameter("family parameter must be positive"));
    }
    Ok(match family {
        Family::Power => Member { f: AnalyticFunction::power(param as usize), n: param, terms: None },
        Family::Lacunary => {
            if param > LacunarySeries::MAX_INDEX as u64 {
                return Err(Error::parameter(format!("lacunary m = {param} too large")));
            }
            Member { f: LacunarySeries::ones(param as u32).into(), n: 1 << param, terms: Some(param) }
        }
        Family::ClusteredBlaschke | Family::UniformBlaschke => {
            let kind = if family == Family::ClusteredBlaschke {
                FamilyKind::ClusteredBlaschke
            } else {
                FamilyKind::UniformBlaschke
            };
            Member { f: random_family(kind, param as usize, seed)?, n: param, terms: None }
        }
        Family::Constant => Member {
            f: AnalyticFunction::constant(num_complex::Complex64::new(1.0, 0.0)),
            n: param,
            terms: None,
        },
    })
}

/// Multiplier `g` in the `B'g` sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GFactor {
    One,
    /// `1/(1 − z/2)`.
    GeometricHalf,
    RandomPolynomial { degree: usize, seed: u64 },
}

impl GFactor {
    pub fn build(self) -> Result<AnalyticFunction> {
        match self {
            GFactor::One => Ok(AnalyticFunction::constant(num_complex::Complex64::new(1.0, 0.0))),
            GFactor::GeometricHalf => Ok(AnalyticFunction::geometric_half()),
            GFactor::RandomPolynomial { degree, seed } => random_family(FamilyKind::RandomPolynomial, degree, seed),
        }
    }
}

impl FromStr for GFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" | "1" => Ok(GFactor::One),
            "geometric-half" => Ok(GFactor::GeometricHalf),
            "random-polynomial" => Ok(GFactor::RandomPolynomial { degree: 4, seed: 0 }),
            _ => Err(Error::parameter(format!("unknown multiplier g {s:?}"))),
        }
    }
}

/// Sweep grids default to 8 Gauss nodes per panel and angular scale 16;
/// refinement error estimates are optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub theorem: Theorem,
    pub family: Family,
    pub seed: u64,
    pub params: Vec<u64>,
    pub p: f64,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub g: GFactor,
    pub r_list: Vec<f64>,
    pub grid: GridOverrides,
    pub error_estimates: bool,
}

impl SweepConfig {
    pub fn new(theorem: Theorem, family: Family) -> Self {
        SweepConfig {
            theorem,
            family,
            seed: 0,
            params: family.default_params(),
            p: 2.0,
            sigma: None,
            alpha: None,
            g: GFactor::One,
            r_list: vec![0.5, 0.9, 0.99, 0.999],
            grid: GridOverrides::default(),
            error_estimates: false,
        }
    }

    fn sweep_grid(&self) -> GridOverrides {
        let mut g = self.grid.clone();
        g.order.get_or_insert(8);
        if g.angular.is_none() {
            g.angular_scale.get_or_insert(16.0);
        }
        g
    }

    fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::parameter("empty n list"));
        }
        if self.params.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::parameter("n list must be strictly increasing"));
        }
        if !self.p.is_finite() {
            return Err(Error::parameter("p must be finite"));
        }
        match self.theorem {
            Theorem::One | Theorem::Three if !(self.p > 1.0) => {
                Err(Error::parameter(format!("p > 1 required, got p = {}", self.p)))
            }
            Theorem::OneSup if !(self.p >= 1.0 && self.p <= 2.0) => {
                Err(Error::parameter(format!("1 <= p <= 2 required, got p = {}", self.p)))
            }
            Theorem::Pommerenke if !(self.p >= 1.0 && self.p < 2.0) => {
                Err(Error::parameter(format!("1 <= p < 2 required, got p = {}", self.p)))
            }
            Theorem::Lemma32 if !(self.p >= 1.0 && self.p < 2.0) => {
                Err(Error::parameter(format!("1 <= p < 2 required, got p = {}", self.p)))
            }
            Theorem::Lemma32 if self.r_list.iter().any(|r| !(0.0..1.0).contains(r)) => {
                Err(Error::parameter("radii must lie in [0, 1)"))
            }
            Theorem::Two => besov_regime(self.p, self.sigma, self.alpha).map(|_| ()),
            _ => Ok(()),
        }
    }
}

/// The two regimes of the Besov growth bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BesovRegime {
    /// `p ≥ 2σ/(2−σ)`: bound `n^{ασ}(log n)^{σ/2}`, `λ = 1/log n`.
    Log,
    /// `p < 2σ/(2−σ)`, `σ < p/(αp+1)`: bound `n^{ασ+σ/p+σ/2−1}`, `λ = 2 − p(2−σ)/σ`.
    Power,
}

pub fn besov_regime(p: f64, sigma: Option<f64>, alpha: Option<f64>) -> Result<(BesovRegime, f64, f64)> {
    let sigma = sigma.ok_or_else(|| Error::parameter("sigma is required"))?;
    let alpha = alpha.ok_or_else(|| Error::parameter("alpha is required"))?;
    if !(p > 1.0) {
        return Err(Error::parameter(format!("p > 1 required, got p = {p}")));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::parameter(format!("0 < alpha < 1/2 required, got alpha = {alpha}")));
    }
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::parameter(format!("0 < sigma < 2 required, got sigma = {sigma}")));
    }
    if p >= 2.0 * sigma / (2.0 - sigma) {
        Ok((BesovRegime::Log, sigma, alpha))
    } else if sigma < p / (alpha * p + 1.0) {
        Ok((BesovRegime::Power, sigma, alpha))
    } else {
        Err(Error::parameter(format!(
            "p < 2 sigma/(2 - sigma) requires sigma < p/(alpha p + 1) = {}, got sigma = {sigma}",
            p / (alpha * p + 1.0)
        )))
    }
}

/// `λ` from the proof mechanism: `1/log n` in the log regime, else the root of
/// `p = (2 − λ)σ/(2 − σ)`.
pub fn lambda_policy(regime: BesovRegime, n: u64, p: f64, sigma: f64) -> f64 {
    match regime {
        BesovRegime::Log => 1.0 / (n.max(2) as f64).ln(),
        BesovRegime::Power => 2.0 - p * (2.0 - sigma) / sigma,
    }
}

/// One sweep row. `lhs / (scale · norm) = ratio`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: u64,
    /// Valence bound fed to the inequality.
    pub n: u64,
    pub terms: Option<u64>,
    pub r: Option<f64>,
    pub lhs: f64,
    pub lhs_error: Option<f64>,
    pub norm: f64,
    pub scale: f64,
    pub ratio: f64,
    pub lambda: Option<f64>,
    /// Whether `λ` satisfies both conditions used in the Besov argument.
    pub lambda_admissible: Option<bool>,
    pub is_max: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub fit: Option<GrowthFit>,
    pub fit_note: Option<String>,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

fn area(
    integrand: &(impl CircleIntegrand + ?Sized),
    quad: &DiskQuadrature,
    lo: f64,
    hi: f64,
    estimate: bool,
) -> Result<(f64, Option<f64>)> {
    let v = band_integral(integrand, quad, lo, hi)?;
    let e = if estimate {
        Some((band_integral(integrand, &quad.refined(), lo, hi)? - v).abs())
    } else {
        None
    };
    Ok((v, e))
}

fn hardy_pow(f: &AnalyticFunction, p: f64, grid: &GridOverrides) -> Result<f64> {
    let m = grid.circle_samples(f);
    quadrature::circle_power_mean(f, Part::Value, 1.0, p, m)
}

fn sqrt_log(n: u64) -> f64 {
    ((n as f64) + 1.0).ln().sqrt()
}

fn row(param: u64, m: &Member, lhs: (f64, Option<f64>), norm: f64, scale: f64) -> SweepRow {
    let ratio = lhs.0 / (scale * norm);
    SweepRow {
        param,
        n: m.n,
        terms: m.terms,
        r: None,
        lhs: lhs.0,
        lhs_error: lhs.1,
        norm,
        scale,
        ratio,
        lambda: None,
        lambda_admissible: None,
        is_max: false,
    }
}

fn sweep_rows(cfg: &SweepConfig, param: u64) -> Result<Vec<SweepRow>> {
    let member = family_member(cfg.family, param, cfg.seed)?;
    let grid = cfg.sweep_grid();
    let f = &member.f;
    let p = cfg.p;
    let est = cfg.error_estimates;
    Ok(match cfg.theorem {
        Theorem::One => {
            let lhs = area(&DerivPower::new(f, 1.0), &grid.disk(f, 0.0)?, 0.0, 1.0, est)?;
            let norm = hardy_pow(f, p, &grid)?.powf(1.0 / p);
            vec![row(param, &member, lhs, norm, sqrt_log(member.n))]
        }
        Theorem::OneSup => {
            let lhs = area(&DerivPower::new(f, p), &grid.disk(f, 0.0)?, 0.0, 1.0, est)?;
            let sup = norms::max_modulus(f, 1.0)?;
            let scale = if p == 1.0 { sqrt_log(member.n) } else { (member.n as f64).powf(p - 1.0) };
            vec![row(param, &member, lhs, sup.powf(p), scale)]
        }
        Theorem::Two => {
            let (regime, sigma, alpha) = besov_regime(p, cfg.sigma, cfg.alpha)?;
            let gamma = (1.0 - alpha) * sigma - 1.0;
            let lhs = area(&DerivPower::new(f, sigma), &grid.disk(f, gamma)?, 0.0, 1.0, est)?;
            let norm = hardy_pow(f, p, &grid)?.powf(sigma / p);
            let nf = member.n as f64;
            let scale = match regime {
                BesovRegime::Log => nf.powf(alpha * sigma) * nf.ln().powf(sigma / 2.0),
                BesovRegime::Power => nf.powf(alpha * sigma + sigma / p + sigma / 2.0 - 1.0),
            };
            let lambda = lambda_policy(regime, member.n, p, sigma);
            let mut r = row(param, &member, lhs, norm, scale);
            r.lambda = Some(lambda);
            r.lambda_admissible = Some(
                p >= (2.0 - lambda) * sigma / (2.0 - sigma) - 1e-12 && p * (1.0 - 2.0 * alpha) > lambda,
            );
            vec![r]
        }
        Theorem::Three => {
            let g = cfg.g.build()?;
            let integrand = DerivPower { f, g: Some(&g), p: 1.0 };
            let lhs = area(&integrand, &grid.disk(f, 0.0)?, 0.0, 1.0, est)?;
            let norm = hardy_pow(&g, p, &grid)?.powf(1.0 / p);
            vec![row(param, &member, lhs, norm, sqrt_log(member.n))]
        }
        Theorem::Pommerenke => {
            let rep = norms::pommerenke_mixed_norm(f, p, &grid)?;
            let lhs = (rep.value, est.then_some(rep.error_estimate));
            let norm = hardy_pow(f, p, &grid)?;
            vec![row(param, &member, lhs, norm, (member.n as f64).powf(p / 2.0))]
        }
        Theorem::Lemma32 => check_lemma32(f, p, member.n, &cfg.r_list, &grid)?
            .into_iter()
            .map(|l| SweepRow {
                r: Some(l.r),
                ..row(param, &member, (l.lhs, None), l.hardy_norm, l.bound / l.hardy_norm.max(f64::MIN_POSITIVE))
            })
            .map(|mut r| {
                // keep ratio = lhs / bound even for a vanishing norm
                r.ratio = if r.lhs == 0.0 { 0.0 } else { r.ratio };
                r
            })
            .collect(),
    })
}

fn fit_for(theorem: Theorem) -> Option<Fixed> {
    match theorem {
        Theorem::One | Theorem::Three => Some(Fixed::beta(0.0)),
        Theorem::OneSup | Theorem::Two | Theorem::Pommerenke => Some(Fixed::gamma(0.0)),
        Theorem::Lemma32 => None,
    }
}

/// Runs a sweep; rows are computed in parallel and returned in parameter order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let nested: Result<Vec<Vec<SweepRow>>> = cfg.params.par_iter().map(|&p| sweep_rows(cfg, p)).collect();
    let mut rows: Vec<SweepRow> = nested?.into_iter().flatten().collect();
    if let Some(bad) = rows.iter().find(|r| !r.ratio.is_finite()) {
        return Err(Error::NonFinite { radius: bad.r.unwrap_or(1.0) });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    if let Some(r) = rows.iter_mut().find(|r| r.ratio == max_ratio) {
        r.is_max = true;
    }
    let (fit, fit_note) = match fit_for(cfg.theorem) {
        None => (None, Some("no growth model for this table".to_string())),
        Some(_) if rows.len() < 3 => (None, Some(format!("fit skipped: {} row(s)", rows.len()))),
        Some(fixed) => {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.lhs / r.norm)).collect();
            match fit_growth(&pts, fixed) {
                Ok(fit) => (Some(fit), None),
                Err(e) => (None, Some(format!("fit skipped: {e}"))),
            }
        }
    };
    Ok(SweepResult { config: cfg.clone(), rows, fit, fit_note, max_ratio, min_ratio })
}

/// Outcome of the Hayman witness search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaymanWitness {
    pub r: f64,
    pub lambda: f64,
    pub n_bound: u64,
    pub found: bool,
    pub r_tilde: f64,
    pub lhs: f64,
    /// `4 n M(r,f)^λ / (λ (1 − r))`.
    pub rhs: f64,
    /// Smallest `lhs/rhs` observed.
    pub min_ratio: f64,
    pub candidates: usize,
    pub perturbed: bool,
}

/// Scans 64 radii upward from `2r − 1` to `r` for one satisfying the
/// Hayman inequality, then refines once on an 8× finer grid around the best.
pub fn hayman_witness_search(f: &AnalyticFunction, r: f64, lambda: f64, n_bound: u64) -> Result<HaymanWitness> {
    if !(r > 0.5 && r < 1.0) {
        return Err(Error::parameter(format!("1/2 < r < 1 required, got r = {r}")));
    }
    if !(lambda > 0.0 && lambda < 2.0) {
        return Err(Error::parameter(format!("0 < lambda < 2 required, got lambda = {lambda}")));
    }
    let mm = norms::max_modulus(f, r)?;
    let rhs = 4.0 * n_bound as f64 * mm.powf(lambda) / (lambda * (1.0 - r));
    let m = norms::GridOverrides::default().circle_samples(f);
    let lo = 2.0 * r - 1.0;
    let mut best = (f64::INFINITY, lo, 0.0, false);
    let mut scanned = 0;
    let try_radius = |rt: f64, best: &mut (f64, f64, f64, bool)| -> Result<Option<HaymanWitness>> {
        let lhs = norms::hayman_lhs(f, rt, lambda, m, true)?;
        let ratio = lhs.value / rhs;
        if ratio < best.0 {
            *best = (ratio, lhs.radius, lhs.value, lhs.perturbed);
        }
        Ok((lhs.value <= rhs).then_some(HaymanWitness {
            r,
            lambda,
            n_bound,
            found: true,
            r_tilde: lhs.radius,
            lhs: lhs.value,
            rhs,
            min_ratio: ratio,
            candidates: 0,
            perturbed: lhs.perturbed,
        }))
    };
    let coarse = (r - lo) / 63.0;
    for i in 0..64 {
        scanned += 1;
        if let Some(mut w) = try_radius(lo + coarse * i as f64, &mut best)? {
            w.candidates = scanned;
            return Ok(w);
        }
    }
    let center = best.1;
    let fine = coarse / 8.0;
    for i in -8i32..=8 {
        let rt = center + fine * i as f64;
        if i == 0 || rt < lo || rt > r {
            continue;
        }
        scanned += 1;
        if let Some(mut w) = try_radius(rt, &mut best)? {
            w.candidates = scanned;
            return Ok(w);
        }
    }
    Ok(HaymanWitness {
        r,
        lambda,
        n_bound,
        found: false,
        r_tilde: best.1,
        lhs: best.2,
        rhs,
        min_ratio: best.0,
        candidates: scanned,
        perturbed: best.3,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma32Row {
    pub r: f64,
    /// `∫₀^{2π}|f'(re^{it})| dt`.
    pub lhs: f64,
    /// `n^{1/2} (1 − r)^{−1/p} ‖f‖_{H^p}`.
    pub bound: f64,
    pub hardy_norm: f64,
    pub ratio: f64,
}

/// Circle integrals of `|f'|` against the Lemma 3.1 bound without its constant;
/// the largest ratio is the empirical `C(p)`.
pub fn check_lemma32(
    f: &AnalyticFunction,
    p: f64,
    n_bound: u64,
    r_list: &[f64],
    grid: &GridOverrides,
) -> Result<Vec<Lemma32Row>> {
    if !(p >= 1.0 && p < 2.0) {
        return Err(Error::parameter(format!("1 <= p < 2 required, got p = {p}")));
    }
    let hardy = hardy_pow(f, p, grid)?.powf(1.0 / p);
    let m = grid.circle_samples(f);
    r_list
        .iter()
        .map(|&r| {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::parameter(format!("radius {r} outside [0, 1)")));
            }
            let lhs = 2.0 * PI * quadrature::circle_power_mean(f, Part::Derivative, r, 1.0, m)?;
            let bound = (n_bound as f64).sqrt() * (1.0 - r).powf(-1.0 / p) * hardy;
            let ratio = if lhs == 0.0 { 0.0 } else { lhs / bound };
            Ok(Lemma32Row { r, lhs, bound, hardy_norm: hardy, ratio })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRadius {
    pub k: f64,
    pub n: u64,
    /// `1 − 1/n^K`.
    pub split: f64,
    pub inner: f64,
    pub annulus: f64,
    /// `∫_𝔻 |f'| dA` on the unsplit grid.
    pub total: f64,
    pub hardy_norm: f64,
    pub reconciliation: f64,
}

/// `∫|f'| dA` over `|z| < 1 − 1/n^K` and over the complementary annulus.
pub fn split_radius_diagnostic(f: &AnalyticFunction, p: f64, k: f64, grid: &GridOverrides) -> Result<SplitRadius> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::parameter(format!("K = {k} must be positive")));
    }
    if !(p >= 1.0) {
        return Err(Error::parameter(format!("p = {p} must be >= 1")));
    }
    let n = f.degree().max(1);
    let split = 1.0 - (n as f64).powf(-k);
    let quad = grid.disk(f, 0.0)?;
    let h = DerivPower::new(f, 1.0);
    let inner = band_integral(&h, &quad, 0.0, split)?;
    let annulus = quadrature::annulus_integral(&h, &quad, split)?;
    let total = band_integral(&h, &quad, 0.0, 1.0)?;
    let reconciliation = (inner + annulus - total).abs() / total.abs().max(f64::MIN_POSITIVE);
    Ok(SplitRadius {
        k,
        n,
        split,
        inner,
        annulus,
        total,
        hardy_norm: hardy_pow(f, p, grid)?.powf(1.0 / p),
        reconciliation,
    })
}

/// Means of the `B'` circle integrals: `(1/2π)∫|B'(re^{it})|dt` and `max |B'|`
/// on `m` points, for the `|B'| ≤ 1/(1−r²)` and `∫|B'| ≤ 2πn` checks.
pub fn blaschke_derivative_profile(f: &AnalyticFunction, r: f64, m: usize) -> Result<(f64, f64)> {
    let s = f.sample_circle(r, m);
    let mods: Vec<f64> = s.derivs.iter().map(|d| d.norm()).collect();
    let max = mods.iter().copied().fold(0.0, f64::max);
    let mean = sum::mean(&mods);
    if mean.is_finite() {
        Ok((mean, max))
    } else {
        Err(Error::NonFinite { radius: r })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(theorem: Theorem, family: Family, params: Vec<u64>) -> SweepConfig {
        SweepConfig { params, ..SweepConfig::new(theorem, family) }
    }

    #[test]
    fn theorem1_power_family() {
        let res = run_sweep(&cfg(Theorem::One, Family::Power, vec![4, 16, 64, 256])).unwrap();
        for r in &res.rows {
            let n = r.n as f64;
            assert_relative_eq!(r.lhs, 2.0 * PI * n / (n + 1.0), max_relative = 1e-8);
            assert_relative_eq!(r.norm, 1.0, max_relative = 1e-12);
        }
        assert!(res.rows.windows(2).all(|w| w[1].ratio < w[0].ratio));
        assert!(res.rows[0].is_max);
        assert!(res.fit.is_some());
    }

    #[test]
    fn singleton_skips_fit() {
        let res = run_sweep(&cfg(Theorem::One, Family::Lacunary, vec![5])).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.rows[0].n, 32);
        assert_eq!(res.rows[0].terms, Some(5));
        assert!(res.fit.is_none() && res.fit_note.is_some());
    }

    #[test]
    fn theorem1_sup_power_family() {
        let mut c = cfg(Theorem::OneSup, Family::Power, vec![8, 32]);
        c.p = 2.0;
        for r in run_sweep(&c).unwrap().rows {
            assert_relative_eq!(r.lhs, PI * r.n as f64, max_relative = 1e-8);
            assert_relative_eq!(r.ratio, PI, max_relative = 1e-8);
        }
        let mut c = cfg(Theorem::OneSup, Family::Constant, vec![8, 32]);
        c.p = 1.5;
        assert!(run_sweep(&c).unwrap().rows.iter().all(|r| r.lhs == 0.0 && r.ratio == 0.0));
    }

    #[test]
    fn theorem2_rejects_hypothesis_violations() {
        let mut c = cfg(Theorem::Two, Family::Power, vec![16, 32]);
        c.sigma = Some(1.0);
        c.alpha = Some(0.5);
        let e = run_sweep(&c).unwrap_err();
        assert!(e.is_parameter() && e.to_string().contains("alpha < 1/2"));
        c.alpha = Some(0.25);
        c.p = 1.2;
        c.sigma = Some(1.5);
        assert!(run_sweep(&c).unwrap_err().to_string().contains("sigma < p/(alpha p + 1)"));
    }

    #[test]
    fn theorem2_lambda_policy() {
        let mut c = cfg(Theorem::Two, Family::Power, vec![16, 64, 256]);
        c.sigma = Some(1.0);
        c.alpha = Some(0.25);
        c.p = 2.0;
        let res = run_sweep(&c).unwrap();
        for r in &res.rows {
            assert_relative_eq!(r.lambda.unwrap(), 1.0 / (r.n as f64).ln(), max_relative = 1e-15);
        }
        assert!(res.rows.windows(2).all(|w| w[1].ratio <= w[0].ratio * (1.0 + 1e-3)));
        // regime 2: p = (2 − λ)σ/(2 − σ)
        let (regime, sigma, _) = besov_regime(1.5, Some(1.0), Some(0.2)).unwrap();
        assert_eq!(regime, BesovRegime::Power);
        let lambda = lambda_policy(regime, 100, 1.5, sigma);
        assert_relative_eq!((2.0 - lambda) * sigma / (2.0 - sigma), 1.5, max_relative = 1e-15);
    }

    #[test]
    fn theorem3_power_and_degree_one() {
        let res = run_sweep(&cfg(Theorem::Three, Family::Power, vec![1, 10, 100])).unwrap();
        let n = |r: &SweepRow| r.n as f64;
        for r in &res.rows {
            assert_relative_eq!(r.lhs, 2.0 * PI * n(r) / (n(r) + 1.0), max_relative = 1e-8);
        }
        assert_relative_eq!(res.rows[0].lhs, PI, max_relative = 1e-10);
    }

    #[test]
    fn pommerenke_power_family() {
        let mut c = cfg(Theorem::Pommerenke, Family::Power, vec![4, 16, 64]);
        c.p = 1.0;
        for r in run_sweep(&c).unwrap().rows {
            assert_relative_eq!(r.lhs, 2.0 * PI, max_relative = 1e-8);
            assert_relative_eq!(r.ratio, 2.0 * PI / (r.n as f64).sqrt(), max_relative = 1e-8);
        }
    }

    #[test]
    fn lemma32_power_closed_form() {
        let f = AnalyticFunction::power(6);
        for row in check_lemma32(&f, 1.5, 6, &[0.3, 0.9], &GridOverrides::default()).unwrap() {
            assert_relative_eq!(row.lhs, 2.0 * PI * 6.0 * row.r.powi(5), max_relative = 1e-12);
        }
        let c = AnalyticFunction::constant(num_complex::Complex64::new(2.0, 0.0));
        assert!(check_lemma32(&c, 1.5, 1, &[0.5], &GridOverrides::default()).unwrap()[0].lhs == 0.0);
        assert!(check_lemma32(&f, 2.0, 6, &[0.5], &GridOverrides::default()).unwrap_err().is_parameter());
    }

    #[test]
    fn split_radius_power_closed_form() {
        let n = 16usize;
        let f = AnalyticFunction::power(n);
        let s = split_radius_diagnostic(&f, 2.0, 1.0, &GridOverrides::default()).unwrap();
        let nf = n as f64;
        let r0 = 1.0 - 1.0 / nf;
        let inner = 2.0 * PI * nf / (nf + 1.0) * r0.powf(nf + 1.0);
        assert_relative_eq!(s.inner, inner, max_relative = 1e-10);
        assert_relative_eq!(s.annulus, 2.0 * PI * nf / (nf + 1.0) - inner, max_relative = 1e-10);
        assert!(s.reconciliation < 1e-9);
        let far = split_radius_diagnostic(&f, 2.0, 8.0, &GridOverrides::default()).unwrap();
        assert!(far.annulus < 1e-6 * s.annulus);
    }

    #[test]
    fn hayman_power_witness() {
        let n = 4u64;
        let f = AnalyticFunction::power(n as usize);
        for &r in &[0.9, 0.99] {
            for &lambda in &[0.5, 1.0, 1.5] {
                let w = hayman_witness_search(&f, r, lambda, n).unwrap();
                assert!(w.found);
                let nf = n as f64;
                assert_relative_eq!(w.lhs, 2.0 * PI * nf * nf * w.r_tilde.powf(nf * lambda - 2.0), max_relative = 1e-10);
                assert_relative_eq!(w.rhs, 4.0 * nf * r.powf(nf * lambda) / (lambda * (1.0 - r)), max_relative = 1e-10);
            }
        }
        let c = AnalyticFunction::constant(num_complex::Complex64::new(1.0, 0.0));
        let w = hayman_witness_search(&c, 0.9, 1.0, 1).unwrap();
        assert!(w.found && w.lhs == 0.0);
        assert!(hayman_witness_search(&f, 0.4, 1.0, 4).unwrap_err().is_parameter());
    }

    #[test]
    fn sweep_is_deterministic() {
        let c = cfg(Theorem::Three, Family::ClusteredBlaschke, vec![16, 32, 64]);
        assert_eq!(run_sweep(&c).unwrap(), run_sweep(&c).unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(run_sweep(&cfg(Theorem::One, Family::Power, vec![8, 4])).unwrap_err().is_parameter());
        let mut c = cfg(Theorem::One, Family::Power, vec![4]);
        c.p = 1.0;
        assert!(run_sweep(&c).unwrap_err().is_parameter());
        assert!("4".parse::<Theorem>().is_err());
        assert_eq!("lemma32".parse::<Theorem>().unwrap(), Theorem::Lemma32);
        assert_eq!("clustered-blaschke".parse::<Family>().unwrap(), Family::ClusteredBlaschke);
    }
}
