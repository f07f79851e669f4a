//! Aberth–Ehrlich simultaneous root finder, used as an oracle for valence
//! counts and to locate the poles of rational functions.

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct AberthOptions {
    pub max_sweeps: usize,
    /// Converged once every correction is below `tol·(1 + |z|)`.
    pub tol: f64,
}

impl Default for AberthOptions {
    fn default() -> Self {
        AberthOptions {
            max_sweeps: 200,
            tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Roots {
    pub roots: Vec<Complex64>,
    pub sweeps: usize,
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = p;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of `Σ c_k z^k` (ascending coefficients).
///
/// Roots of exact multiplicity converge only linearly; the iteration still
/// stops once corrections stall below `sqrt(tol)` after the sweep budget is
/// spent, and errors otherwise.
pub fn aberth(coeffs: &[Complex64], opts: &AberthOptions) -> Result<Roots> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::parameter("non-finite polynomial coefficient"));
    }
    // exact zeros at the origin
    let lead_zeros = c.iter().take_while(|x| x.norm() == 0.0).count();
    let c = &c[lead_zeros.min(c.len())..];
    let mut roots = vec![Complex64::new(0.0, 0.0); lead_zeros];
    if c.len() <= 1 {
        return Ok(Roots { roots, sweeps: 0 });
    }
    let d = c.len() - 1;
    let lead = c[d];
    // geometric mean of the root moduli
    let radius = (c[0].norm() / lead.norm()).powf(1.0 / d as f64);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4))
        .collect();
    let mut last_step = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        let mut converged = true;
        last_step = 0.0;
        for i in 0..d {
            let (p, dp) = horner(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..d).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            let rel = step.norm() / (1.0 + z[i].norm());
            last_step = last_step.max(rel);
            if rel > opts.tol {
                converged = false;
            }
        }
        if converged {
            roots.extend(z);
            return Ok(Roots { roots, sweeps: sweep });
        }
    }
    if last_step < opts.tol.sqrt() {
        roots.extend(z);
        return Ok(Roots {
            roots,
            sweeps: opts.max_sweeps,
        });
    }
    Err(Error::RootFinder {
        sweeps: opts.max_sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut p = vec![c(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![c(0.0, 0.0); p.len() + 1];
            for (k, &a) in p.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            p = next;
        }
        p
    }

    #[test]
    fn cube_roots() {
        let r = aberth(&[c(-0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], &AberthOptions::default()).unwrap();
        assert_eq!(r.roots.len(), 3);
        for z in r.roots {
            assert!((z.powu(3) - c(0.5, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_roots_and_double_root() {
        let r = aberth(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], &AberthOptions::default()).unwrap();
        assert_eq!(r.roots, vec![c(0.0, 0.0); 2]);
        let r = aberth(&from_roots(&[c(2.0, 0.0), c(2.0, 0.0), c(-3.0, 1.0)]), &AberthOptions::default()).unwrap();
        let mut found = r.roots.clone();
        found.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((found[0] - c(-3.0, 1.0)).norm() < 1e-10);
        assert!((found[1] - c(2.0, 0.0)).norm() < 1e-6);
    }

    proptest! {
        #[test]
        fn recovers_distinct_roots(parts in proptest::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 1..12)) {
            let roots: Vec<Complex64> = parts.iter().map(|&(a, b)| c(a, b)).collect();
            let min_gap = roots.iter().enumerate()
                .flat_map(|(i, a)| roots[i + 1..].iter().map(move |b| (a - b).norm()))
                .fold(f64::INFINITY, f64::min);
            prop_assume!(min_gap > 1e-2);
            let found = aberth(&from_roots(&roots), &AberthOptions::default()).unwrap().roots;
            for r in &roots {
                let best = found.iter().map(|z| (z - r).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(best < 1e-8, "root {r} missed by {best}");
            }
        }
    }
}
