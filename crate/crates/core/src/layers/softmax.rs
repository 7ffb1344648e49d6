use crate::error::{invalid, shape, Result};
use crate::tensor::Tensor4;

#[derive(Clone, Debug)]
pub struct SoftmaxLoss {
    /// Mean negative log-likelihood over the batch.
    pub loss: f32,
    /// `(probs - onehot) / N`, same dims as the logits.
    pub grad_logits: Tensor4,
    pub probs: Tensor4,
}

/// Row-wise softmax over the flattened `(N, C*H*W)` logits, max-subtracted.
pub fn softmax(logits: &Tensor4) -> Tensor4 {
    let classes = logits.sample_len();
    let mut probs = logits.clone();
    for row in probs.data_mut().chunks_mut(classes) {
        let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let mut total = 0.0f64;
        for v in row.iter_mut() {
            let e = ((*v - max) as f64).exp();
            *v = e as f32;
            total += e;
        }
        row.iter_mut().for_each(|v| *v = (*v as f64 / total) as f32);
    }
    probs
}

pub fn softmax_cross_entropy(logits: &Tensor4, labels: &[usize]) -> Result<SoftmaxLoss> {
    let (n, classes) = (logits.n(), logits.sample_len());
    if labels.len() != n {
        return Err(shape(format!("{} labels for a batch of {n}", labels.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(invalid(format!("label {bad} out of range for {classes} classes")));
    }
    let probs = softmax(logits);
    let mut nll = 0.0f64;
    for (row, &label) in logits.data().chunks(classes).zip(labels) {
        let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
        let lse = row.iter().map(|&v| (v as f64 - max).exp()).sum::<f64>().ln() + max;
        nll += lse - row[label] as f64;
    }
    let mut grad_logits = probs.clone();
    let inv_n = 1.0 / n as f32;
    for (row, &label) in grad_logits.data_mut().chunks_mut(classes).zip(labels) {
        row[label] -= 1.0;
        row.iter_mut().for_each(|v| *v *= inv_n);
    }
    Ok(SoftmaxLoss {
        loss: (nll / n as f64) as f32,
        grad_logits,
        probs,
    })
}
