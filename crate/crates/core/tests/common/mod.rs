#![allow(dead_code)]

use nulite::{Rng, Tensor4};

/// Central differences of `f` at every element of `values`, evaluated in f64.
pub fn numeric_grad(values: &[f32], step: f32, f: impl Fn(&[f32]) -> f64) -> Vec<f64> {
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

/// Norm-wise relative error between analytic and numeric gradients.
pub fn rel_error(analytic: &[f32], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let diff: f64 = analytic.iter().zip(numeric).map(|(&a, &n)| (a as f64 - n).powi(2)).sum();
    let na: f64 = analytic.iter().map(|&a| (a as f64).powi(2)).sum::<f64>().sqrt();
    let nn: f64 = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    if na.max(nn) == 0.0 {
        0.0
    } else {
        diff.sqrt() / na.max(nn)
    }
}

/// Scalar probe `sum(t * r)`.
pub fn dot(t: &Tensor4, r: &Tensor4) -> f64 {
    t.data().iter().zip(r.data()).map(|(&a, &b)| a as f64 * b as f64).sum()
}

pub fn tensor(dims: [usize; 4], values: &[f32]) -> Tensor4 {
    Tensor4::from_vec(dims, values.to_vec()).unwrap()
}

/// Shuffled values `gap` apart and at least `gap / 2` from zero, so max-pool
/// winners and ReLU signs stay put under perturbations below `gap / 2`.
pub fn spaced_values(n: usize, gap: f32, rng: &mut Rng) -> Vec<f32> {
    let half = (n / 2) as f32;
    let mut v: Vec<f32> = (0..n).map(|i| (i as f32 - half + 0.5) * gap).collect();
    rng.shuffle(&mut v);
    v
}

/// Independent top-k oracle: sort each row by descending score (stable on
/// class index) and look for the label among the first k.
pub fn brute_top_k(probs: &Tensor4, labels: &[usize], k: usize) -> f64 {
    let c = probs.sample_len();
    let mut hits = 0;
    for (row, &label) in probs.data().chunks(c).zip(labels) {
        let mut order: Vec<usize> = (0..c).collect();
        order.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
        if order.iter().take(k).any(|&j| j == label) {
            hits += 1;
        }
    }
    hits as f64 / labels.len() as f64
}

/// Runs the CLI in-process, returning (exit code, stdout, stderr).
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("nulite").chain(args.iter().copied());
    let code = nulite::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
