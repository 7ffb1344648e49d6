use crate::error::{invalid, Result};
use crate::tensor::Tensor4;

/// True when `label` ranks among the `k` highest scores of `row`; equal
/// scores rank the lower class index first.
pub fn in_top_k(row: &[f32], label: usize, k: usize) -> bool {
    let target = row[label];
    let ahead = row
        .iter()
        .enumerate()
        .filter(|&(j, &p)| p > target || (p == target && j < label))
        .count();
    ahead < k
}

/// Fraction of rows whose label is in the top `k` of its probabilities.
pub fn top_k_accuracy(probs: &Tensor4, labels: &[usize], k: usize) -> Result<f64> {
    let classes = probs.sample_len();
    if k == 0 || k > classes {
        return Err(invalid(format!("k = {k} outside 1..={classes}")));
    }
    if labels.len() != probs.n() {
        return Err(invalid(format!("{} labels for {} rows", labels.len(), probs.n())));
    }
    let mut hits = 0usize;
    for (row, &label) in probs.data().chunks(classes).zip(labels) {
        if label >= classes {
            return Err(invalid(format!("label {label} out of range for {classes} classes")));
        }
        hits += in_top_k(row, label, k) as usize;
    }
    Ok(hits as f64 / labels.len() as f64)
}
