//! Finite-difference oracle shared by the operator unit tests.

use crate::tensor::Tensor4;

/// Central differences of `f` with respect to every element of `values`.
pub fn finite_diff(values: &[f32], step: f32, f: impl Fn(&[f32]) -> f64) -> Vec<f64> {
    let mut probe = values.to_vec();
    (0..values.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let up = f(&probe);
            probe[i] = orig - step;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * step as f64)
        })
        .collect()
}

/// `||a - n|| / max(||a||, ||n||)`; zero when both are zero.
pub fn rel_error(analytic: &[f32], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let diff: f64 = analytic.iter().zip(numeric).map(|(&a, &n)| (a as f64 - n).powi(2)).sum();
    let na: f64 = analytic.iter().map(|&a| (a as f64).powi(2)).sum();
    let nn: f64 = numeric.iter().map(|n| n * n).sum();
    let denom = na.sqrt().max(nn.sqrt());
    if denom == 0.0 {
        0.0
    } else {
        diff.sqrt() / denom
    }
}

/// Scalar probe `sum(t * r)` in f64.
pub fn weighted_sum(t: &Tensor4, r: &Tensor4) -> f64 {
    t.data().iter().zip(r.data()).map(|(&a, &b)| a as f64 * b as f64).sum()
}
