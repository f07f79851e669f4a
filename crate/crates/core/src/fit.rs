//! Least-squares fit of `y ≈ C n^β (log n)^γ` in log space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MODEL: &str = "C*n^beta*(log n)^gamma";

/// Parameters held fixed during a fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fixed {
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

impl Fixed {
    pub fn beta(b: f64) -> Self {
        Fixed { beta: Some(b), gamma: None }
    }

    pub fn gamma(g: f64) -> Self {
        Fixed { beta: None, gamma: Some(g) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: String,
    pub c: f64,
    pub beta: f64,
    pub gamma: f64,
    pub fixed: Fixed,
    /// Largest `|log y − log fit(n)|`.
    pub residual: f64,
    pub points: usize,
}

impl GrowthFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.c * n.powf(self.beta) * n.ln().powf(self.gamma)
    }
}

/// Fits `log y = log C + β log n + γ log log n` over the free parameters.
pub fn fit_growth(points: &[(f64, f64)], fixed: Fixed) -> Result<GrowthFit> {
    if points.len() < 3 {
        return Err(Error::parameter(format!("growth fit needs >= 3 points, got {}", points.len())));
    }
    if let Some(&(n, y)) = points.iter().find(|&&(n, y)| !(n > 1.0 && n.is_finite() && y > 0.0 && y.is_finite())) {
        return Err(Error::parameter(format!("growth fit needs n > 1 and y > 0, got ({n}, {y})")));
    }
    let free_beta = fixed.beta.is_none();
    let free_gamma = fixed.gamma.is_none();
    let rows = points.len();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    if free_beta {
        cols.push(points.iter().map(|p| p.0.ln()).collect());
    }
    if free_gamma {
        cols.push(points.iter().map(|p| p.0.ln().ln()).collect());
    }
    let b: Vec<f64> = points
        .iter()
        .map(|&(n, y)| y.ln() - fixed.beta.unwrap_or(0.0) * n.ln() - fixed.gamma.unwrap_or(0.0) * n.ln().ln())
        .collect();
    // centered columns decouple the intercept from the slopes
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let b_mean = mean(&b);
    let col_means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let mut slopes = Vec::new();
    if !cols.is_empty() {
        let a = DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i] - col_means[j]);
        let rhs = DVector::from_iterator(rows, b.iter().map(|v| v - b_mean));
        let scale = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
        let svd = a.svd(true, true);
        if rows < cols.len() + 1 || !(svd.singular_values.min() > 1e-10 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::parameter(format!(
                "degenerate design for the growth fit ({rows} points, {} free parameters)",
                cols.len() + 1
            )));
        }
        let x = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::parameter(format!("growth fit failed: {e}")))?;
        slopes = x.iter().copied().collect();
    }
    let mut it = slopes.iter().copied();
    let beta = fixed.beta.unwrap_or_else(|| it.next().unwrap());
    let gamma = fixed.gamma.unwrap_or_else(|| it.next().unwrap());
    let log_c = b_mean
        - slopes.iter().zip(&col_means).map(|(s, m)| s * m).sum::<f64>();
    let residual = points
        .iter()
        .map(|&(n, y)| (y.ln() - (log_c + beta * n.ln() + gamma * n.ln().ln())).abs())
        .fold(0.0, f64::max);
    Ok(GrowthFit {
        model: MODEL.to_string(),
        c: log_c.exp(),
        beta,
        gamma,
        fixed,
        residual,
        points: rows,
    })
}
