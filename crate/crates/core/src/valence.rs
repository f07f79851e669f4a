//! Covering counts `n(w)` by the argument principle and the area-mean
//! valence `p(R) = (1/π)∫_{|w|<R} n(w) dA(w)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::functions::{AnalyticFunction, Polynomial};
use crate::roots::{aberth, AberthOptions};
use crate::{sum, Error, Result};

/// Default contour radius `1 − 2^{-20}`.
pub const DEFAULT_CONTOUR: f64 = 1.0 - 1.0 / (1u64 << 20) as f64;
/// Minimum allowed `|f(z) − w|` on the contour.
pub const CONTOUR_CLEARANCE: f64 = 1e-6;
/// Accepted distance of the raw residue from an integer.
pub const RESIDUE_TOLERANCE: f64 = 1e-3;
/// Degree limit of the root oracle.
pub const ORACLE_MAX_DEGREE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValenceOptions {
    pub contour: f64,
    /// Initial contour samples; defaults to `max(256, 8·deg)`.
    pub samples: Option<usize>,
    pub max_samples: usize,
    pub radii: usize,
    pub angles: usize,
    pub seed: u64,
}

impl Default for ValenceOptions {
    fn default() -> Self {
        ValenceOptions {
            contour: DEFAULT_CONTOUR,
            samples: None,
            max_samples: 1 << 22,
            radii: 32,
            angles: 64,
            seed: 0,
        }
    }
}

impl ValenceOptions {
    fn initial_samples(&self, f: &AnalyticFunction) -> usize {
        self.samples.unwrap_or_else(|| {
            let d = f.degree().min(1 << 20) as usize;
            (8 * d).max(256).next_power_of_two()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValenceCount {
    pub count: u64,
    /// Contour integral before rounding.
    pub raw: f64,
    pub samples: usize,
}

fn residue(f: &AnalyticFunction, w: Complex64, rho: f64, m: usize) -> Result<f64> {
    let s = f.sample_circle(rho, m);
    let mut min_gap = f64::INFINITY;
    let mut terms = Vec::with_capacity(m);
    for (j, (v, d)) in s.values.iter().zip(&s.derivs).enumerate() {
        let gap = v - w;
        min_gap = min_gap.min(gap.norm());
        let z = Complex64::from_polar(rho, 2.0 * PI * j as f64 / m as f64);
        terms.push((d * z / gap).re);
    }
    if !(min_gap > CONTOUR_CLEARANCE) {
        return Err(Error::ContourTooClose { distance: min_gap });
    }
    let raw = sum::mean(&terms);
    if raw.is_finite() {
        Ok(raw)
    } else {
        Err(Error::NonFinite { radius: rho })
    }
}

/// Number of solutions of `f(z) = w` in `|z| < ρ`, counted with multiplicity,
/// from `(1/2πi)∮ f'/(f − w) dz`. The contour resolution doubles from `m`
/// until the raw value is within `1e-3` of an integer.
pub fn valence_at(f: &AnalyticFunction, w: Complex64, rho: f64, m: usize, max_m: usize) -> Result<ValenceCount> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::parameter(format!("contour radius {rho} not in (0, 1]")));
    }
    if m == 0 {
        return Err(Error::parameter("contour needs at least one sample"));
    }
    let mut m = m;
    loop {
        let raw = residue(f, w, rho, m)?;
        let rounded = raw.round();
        if (raw - rounded).abs() <= RESIDUE_TOLERANCE && rounded >= 0.0 {
            return Ok(ValenceCount { count: rounded as u64, raw, samples: m });
        }
        if 2 * m > max_m {
            return Err(Error::NonIntegerResidue { raw, samples: m });
        }
        m *= 2;
    }
}

/// Root-finder count of solutions of `p(z) = w` in `|z| < ρ`.
pub fn oracle_count(p: &Polynomial, w: Complex64, rho: f64) -> Result<u64> {
    if p.degree() > ORACLE_MAX_DEGREE {
        return Err(Error::parameter(format!(
            "root oracle limited to degree {ORACLE_MAX_DEGREE}, got {}",
            p.degree()
        )));
    }
    let mut c = p.coeffs().to_vec();
    c[0] -= w;
    let roots = aberth(&c, &AberthOptions::default())?;
    Ok(roots.roots.iter().filter(|z| z.norm() < rho).count() as u64)
}

/// One node of the w-grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValenceNode {
    pub w_re: f64,
    pub w_im: f64,
    pub count: u64,
    /// Area of the cell the node represents.
    pub weight: f64,
    pub raw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValenceProfile {
    pub outer_radius: f64,
    pub radii: usize,
    pub angles: usize,
    pub contour: f64,
    pub nodes: Vec<ValenceNode>,
    /// `p(R)`.
    pub mean_valence: f64,
    /// Valence bound of the function (degree).
    pub n_bound: u64,
    /// `n_bound·R²`.
    pub check_value: f64,
    /// Largest `|raw − count|` over the grid.
    pub max_residue_deviation: f64,
}

/// `p(R)` on a polar cell grid in the w-plane.
///
/// Each cell `[R i/N_r, R(i+1)/N_r] × [2πj/N_a, 2π(j+1)/N_a]` contributes its
/// exact area times `n(w)` at a seeded, area-uniform point inside it, so a
/// constant `n(w)` gives exactly `n R²`. A node whose count fails is moved
/// by half an angular step and retried once.
pub fn mean_valence(f: &AnalyticFunction, outer_radius: f64, opts: &ValenceOptions) -> Result<ValenceProfile> {
    let nodes = grid_counts(f, outer_radius, opts)?;
    let mean = clipped_mean(&nodes, outer_radius, outer_radius, opts);
    let dev = nodes.iter().map(|n| (n.raw - n.count as f64).abs()).fold(0.0, f64::max);
    let n_bound = f.degree();
    Ok(ValenceProfile {
        outer_radius,
        radii: opts.radii,
        angles: opts.angles,
        contour: opts.contour,
        nodes,
        mean_valence: mean,
        n_bound,
        check_value: n_bound as f64 * outer_radius * outer_radius,
        max_residue_deviation: dev,
    })
}

/// `p(R)` for several radii on the single grid built for the largest one.
///
/// Cells are clipped to `|w| < R`, so the values are nondecreasing in `R`
/// by construction.
pub fn mean_valence_curve(f: &AnalyticFunction, radii: &[f64], opts: &ValenceOptions) -> Result<Vec<f64>> {
    let outer = radii.iter().copied().fold(0.0, f64::max);
    let nodes = grid_counts(f, outer, opts)?;
    Ok(radii.iter().map(|&r| clipped_mean(&nodes, outer, r, opts)).collect())
}

fn clipped_mean(nodes: &[ValenceNode], outer: f64, r: f64, opts: &ValenceOptions) -> f64 {
    // same area formula at every r keeps the curve monotone to the last bit
    let step = outer / opts.radii as f64;
    let dt = 2.0 * PI / opts.angles as f64;
    let terms: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let i = (k / opts.angles) as f64;
            let s0 = (i * step).min(r);
            let s1 = ((i + 1.0) * step).min(r);
            n.count as f64 * 0.5 * (s1 * s1 - s0 * s0) * dt
        })
        .collect();
    sum::pairwise(&terms) / PI
}

fn grid_counts(f: &AnalyticFunction, outer_radius: f64, opts: &ValenceOptions) -> Result<Vec<ValenceNode>> {
    if !(outer_radius > 0.0) || !outer_radius.is_finite() {
        return Err(Error::parameter(format!("R = {outer_radius} must be positive")));
    }
    if opts.radii == 0 || opts.angles == 0 {
        return Err(Error::parameter("w-grid needs at least one radius and one angle"));
    }
    let (nr, na) = (opts.radii, opts.angles);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cell_radius = outer_radius / nr as f64;
    let dt = 2.0 * PI / na as f64;
    let mut cells = Vec::with_capacity(nr * na);
    for i in 0..nr {
        let (i0, i1) = (i as f64, i as f64 + 1.0);
        let area = 0.5 * cell_radius * cell_radius * (i1 * i1 - i0 * i0) * dt;
        for j in 0..na {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            let s = cell_radius * (i0 * i0 + u * (i1 * i1 - i0 * i0)).sqrt();
            cells.push((s, dt * (j as f64 + v), area));
        }
    }
    let m0 = opts.initial_samples(f);
    cells
        .par_iter()
        .map(|&(s, t, area)| {
            let w = Complex64::from_polar(s, t);
            let res = valence_at(f, w, opts.contour, m0, opts.max_samples).map(|c| (w, c));
            let (w, c) = match res {
                Ok(ok) => ok,
                Err(Error::ContourTooClose { .. }) | Err(Error::NonIntegerResidue { .. }) => {
                    let w2 = Complex64::from_polar(s, t + 0.5 * dt);
                    (w2, valence_at(f, w2, opts.contour, m0, opts.max_samples)?)
                }
                Err(e) => return Err(e),
            };
            Ok(ValenceNode { w_re: w.re, w_im: w.im, count: c.count, weight: area, raw: c.raw })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub outer_radius: f64,
    pub mean_valence: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanValentCertificate {
    pub n_claim: f64,
    pub rows: Vec<CertificateRow>,
    pub pass: bool,
}

/// Passes iff `p(R) ≤ n_claim·R²(1 + 1e-6) + 1e-9` for every `R` in the list.
/// `n_claim` may be any positive real.
pub fn certify_mean_valent(
    f: &AnalyticFunction,
    n_claim: f64,
    radii: &[f64],
    opts: &ValenceOptions,
) -> Result<MeanValentCertificate> {
    if !(n_claim >= 0.0) || !n_claim.is_finite() {
        return Err(Error::parameter(format!("claimed valence {n_claim} must be a finite nonnegative number")));
    }
    if radii.is_empty() {
        return Err(Error::parameter("certificate needs at least one radius"));
    }
    let curve = mean_valence_curve(f, radii, opts)?;
    let rows: Vec<CertificateRow> = radii
        .iter()
        .zip(curve)
        .map(|(&r, p)| {
            let bound = n_claim * r * r;
            CertificateRow {
                outer_radius: r,
                mean_valence: p,
                bound,
                pass: p <= bound * (1.0 + 1e-6) + 1e-9,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(MeanValentCertificate { n_claim, rows, pass })
}
