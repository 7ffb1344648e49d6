use crate::error::{shape, Result};
use crate::model::{Gradients, Network};

/// One momentum-SGD update with L2 decay folded into the gradient:
/// `v = momentum * v + (grad + weight_decay * param)`, `param -= lr * v`.
pub fn sgd_step(
    param: &mut [f32],
    grad: &[f32],
    velocity: &mut [f32],
    lr: f32,
    momentum: f32,
    weight_decay: f32,
) -> Result<()> {
    if param.len() != grad.len() || param.len() != velocity.len() {
        return Err(shape(format!(
            "sgd step: param {}, grad {}, velocity {}",
            param.len(),
            grad.len(),
            velocity.len()
        )));
    }
    for ((p, &g), v) in param.iter_mut().zip(grad).zip(velocity.iter_mut()) {
        *v = momentum * *v + (g + weight_decay * *p);
        *p -= lr * *v;
    }
    Ok(())
}

/// Velocity buffers, one per learnable tensor, created zeroed on first use.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OptimizerState {
    pub velocities: Vec<Vec<f32>>,
    /// Updates applied to each tensor.
    pub steps: Vec<u64>,
}

impl OptimizerState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Updates every learnable tensor of `net`. Weight decay applies only to
    /// conv and linear weights.
    pub fn step(&mut self, net: &mut Network, grads: &Gradients, lr: f32, momentum: f32, weight_decay: f32) -> Result<()> {
        let mut params = net.learnables_mut();
        if params.len() != grads.tensors.len() {
            return Err(shape(format!(
                "{} gradients for {} learnable tensors",
                grads.tensors.len(),
                params.len()
            )));
        }
        if self.velocities.is_empty() {
            self.velocities = params.iter().map(|p| vec![0.0; p.values.len()]).collect();
            self.steps = vec![0; params.len()];
        }
        if self.velocities.len() != params.len() {
            return Err(shape("optimizer state belongs to a different network"));
        }
        for (((p, g), v), n) in params
            .iter_mut()
            .zip(&grads.tensors)
            .zip(&mut self.velocities)
            .zip(&mut self.steps)
        {
            let decay = if p.decay { weight_decay } else { 0.0 };
            sgd_step(p.values, g, v, lr, momentum, decay)
                .map_err(|e| shape(format!("{}: {e}", p.name)))?;
            *n += 1;
        }
        Ok(())
    }
}
