//! Deterministic summation helpers.
//!
//! All reductions in the crate go through these so results do not depend on
//! how work was scheduled across threads.

/// Pairwise summation; the split points depend only on the slice length.
pub fn pairwise(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise(&values[..mid]) + pairwise(&values[mid..])
}

/// Arithmetic mean via [`pairwise`]. Empty input gives zero.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        pairwise(values) / values.len() as f64
    }
}
