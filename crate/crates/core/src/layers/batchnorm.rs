use super::Mode;
use crate::error::{invalid, shape, Result};
use crate::tensor::Tensor4;

pub const BN_EPSILON: f32 = 1e-5;
pub const BN_MOMENTUM: f32 = 0.1;

/// Per-channel batch normalization state.
///
/// Running statistics follow `running = (1 - momentum) * running + momentum * batch`,
/// where the batch variance fed into `running_var` is the unbiased estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchNormParams {
    pub channels: usize,
    pub gamma: Vec<f32>,
    pub beta: Vec<f32>,
    pub running_mean: Vec<f32>,
    pub running_var: Vec<f32>,
    pub momentum: f32,
    pub epsilon: f32,
}

impl BatchNormParams {
    pub fn new(channels: usize) -> Self {
        Self {
            channels,
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            momentum: BN_MOMENTUM,
            epsilon: BN_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.channels;
        if [&self.gamma, &self.beta, &self.running_mean, &self.running_var]
            .iter()
            .any(|v| v.len() != c)
        {
            return Err(shape(format!("batch norm vectors must all have length {c}")));
        }
        if self.running_var.iter().any(|&v| v < 0.0) {
            return Err(invalid("batch norm running_var must be non-negative"));
        }
        if !(self.epsilon > 0.0) || !(self.momentum > 0.0 && self.momentum < 1.0) {
            return Err(invalid("batch norm epsilon must be > 0 and momentum in (0,1)"));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        2 * self.channels
    }

    fn check_input(&self, x: &Tensor4) -> Result<()> {
        if x.c() != self.channels {
            return Err(shape(format!(
                "batch norm expects {} channels, got {}",
                self.channels,
                x.c()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BatchNormGrads {
    pub grad_x: Tensor4,
    pub grad_gamma: Vec<f32>,
    pub grad_beta: Vec<f32>,
}

/// Mean and biased variance per channel over (N, H, W), accumulated in f64.
fn batch_stats(x: &Tensor4) -> (Vec<f64>, Vec<f64>) {
    let (c, hw) = (x.c(), x.h() * x.w());
    let m = (x.n() * hw) as f64;
    let mut mean = vec![0.0f64; c];
    let mut var = vec![0.0f64; c];
    for sample in x.data().chunks(c * hw) {
        for (acc, plane) in mean.iter_mut().zip(sample.chunks(hw)) {
            *acc += plane.iter().map(|&v| v as f64).sum::<f64>();
        }
    }
    mean.iter_mut().for_each(|v| *v /= m);
    for sample in x.data().chunks(c * hw) {
        for ((acc, plane), &mu) in var.iter_mut().zip(sample.chunks(hw)).zip(&mean) {
            *acc += plane.iter().map(|&v| (v as f64 - mu).powi(2)).sum::<f64>();
        }
    }
    var.iter_mut().for_each(|v| *v /= m);
    (mean, var)
}

fn reduced_count(x: &Tensor4) -> usize {
    x.n() * x.h() * x.w()
}

/// Train mode normalizes with batch statistics and updates the running
/// statistics in `p`; eval mode normalizes with the running statistics.
pub fn batchnorm_forward(x: &Tensor4, p: &mut BatchNormParams, mode: Mode) -> Result<Tensor4> {
    p.check_input(x)?;
    let c = x.c();
    let (shift, scale): (Vec<f32>, Vec<f32>) = match mode {
        Mode::Train => {
            let m = reduced_count(x);
            if m < 2 {
                return Err(invalid(format!(
                    "train-mode batch norm needs N*H*W >= 2, got {m}"
                )));
            }
            let (mean, var) = batch_stats(x);
            let unbias = m as f64 / (m - 1) as f64;
            for ch in 0..c {
                let mom = p.momentum as f64;
                p.running_mean[ch] = ((1.0 - mom) * p.running_mean[ch] as f64 + mom * mean[ch]) as f32;
                p.running_var[ch] =
                    ((1.0 - mom) * p.running_var[ch] as f64 + mom * var[ch] * unbias) as f32;
            }
            let eps = p.epsilon as f64;
            (
                mean.iter().map(|&v| v as f32).collect(),
                var.iter().map(|&v| (1.0 / (v + eps).sqrt()) as f32).collect(),
            )
        }
        Mode::Eval => return batchnorm_inference(x, p),
    };

    Ok(normalize(x, p, &shift, &scale))
}

/// Eval-mode normalization without touching `p`.
pub fn batchnorm_inference(x: &Tensor4, p: &BatchNormParams) -> Result<Tensor4> {
    p.check_input(x)?;
    let scale: Vec<f32> = p.running_var.iter().map(|&v| 1.0 / (v + p.epsilon).sqrt()).collect();
    Ok(normalize(x, p, &p.running_mean, &scale))
}

fn normalize(x: &Tensor4, p: &BatchNormParams, shift: &[f32], scale: &[f32]) -> Tensor4 {
    let (c, hw) = (x.c(), x.h() * x.w());
    let mut out = x.clone();
    for sample in out.data_mut().chunks_mut(c * hw) {
        for (ch, plane) in sample.chunks_mut(hw).enumerate() {
            let a = scale[ch] * p.gamma[ch];
            let b = p.beta[ch] - shift[ch] * a;
            plane.iter_mut().for_each(|v| *v = *v * a + b);
        }
    }
    out
}

/// Gradients through train-mode normalization. Batch statistics are
/// recomputed from `x`, so `p`'s running statistics are not consulted.
pub fn batchnorm_backward(x: &Tensor4, p: &BatchNormParams, grad_out: &Tensor4) -> Result<BatchNormGrads> {
    p.check_input(x)?;
    if grad_out.dims() != x.dims() {
        return Err(shape(format!(
            "batch norm grad_out dims {:?} do not match input {:?}",
            grad_out.dims(),
            x.dims()
        )));
    }
    let (c, hw) = (x.c(), x.h() * x.w());
    let m = reduced_count(x) as f64;
    let (mean, var) = batch_stats(x);
    let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + p.epsilon as f64).sqrt()).collect();

    // sum(g) and sum(g * xhat) per channel
    let mut sum_g = vec![0.0f64; c];
    let mut sum_gx = vec![0.0f64; c];
    for (xs, gs) in x.data().chunks(c * hw).zip(grad_out.data().chunks(c * hw)) {
        for ch in 0..c {
            let (mu, is) = (mean[ch], inv_std[ch]);
            for (&xv, &gv) in xs[ch * hw..(ch + 1) * hw].iter().zip(&gs[ch * hw..(ch + 1) * hw]) {
                sum_g[ch] += gv as f64;
                sum_gx[ch] += gv as f64 * (xv as f64 - mu) * is;
            }
        }
    }

    let mut grad_x = Tensor4::zeros(x.dims())?;
    for ((dst, xs), gs) in grad_x
        .data_mut()
        .chunks_mut(c * hw)
        .zip(x.data().chunks(c * hw))
        .zip(grad_out.data().chunks(c * hw))
    {
        for ch in 0..c {
            let (mu, is, gamma) = (mean[ch], inv_std[ch], p.gamma[ch] as f64);
            let k = gamma * is / m;
            let range = ch * hw..(ch + 1) * hw;
            for ((d, &xv), &gv) in dst[range.clone()].iter_mut().zip(&xs[range.clone()]).zip(&gs[range]) {
                let xhat = (xv as f64 - mu) * is;
                *d = (k * (m * gv as f64 - sum_g[ch] - xhat * sum_gx[ch])) as f32;
            }
        }
    }

    Ok(BatchNormGrads {
        grad_x,
        grad_gamma: sum_gx.iter().map(|&v| v as f32).collect(),
        grad_beta: sum_g.iter().map(|&v| v as f32).collect(),
    })
}
