use crate::data::AugmentConfig;
use crate::error::{invalid, Result};

/// Optimizer, schedule and augmentation settings for one training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lr0: f32,
    pub momentum: f32,
    pub weight_decay: f32,
    pub batch_size: usize,
    pub epochs: usize,
    /// 1-based epochs at which the learning rate is multiplied by `lr_factor`.
    pub lr_drop_epochs: Vec<usize>,
    pub lr_factor: f32,
    pub seed: u64,
    pub augment: AugmentConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr0: 0.1,
            momentum: 0.9,
            weight_decay: 0.0005,
            batch_size: 128,
            epochs: 100,
            lr_drop_epochs: vec![26, 51, 76],
            lr_factor: 0.1,
            seed: 0,
            augment: AugmentConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > 0.0) || !self.lr0.is_finite() {
            return Err(invalid(format!("lr0 must be > 0, got {}", self.lr0)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(invalid(format!("momentum must be in [0,1), got {}", self.momentum)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(invalid(format!("weight_decay must be >= 0, got {}", self.weight_decay)));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size must be >= 1"));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs must be >= 1"));
        }
        if !(self.lr_factor > 0.0) {
            return Err(invalid("lr_factor must be > 0"));
        }
        let drops = &self.lr_drop_epochs;
        if drops.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!("lr_drop_epochs {drops:?} must be strictly increasing")));
        }
        if drops.iter().any(|&e| e < 1 || e > self.epochs) {
            return Err(invalid(format!(
                "lr_drop_epochs {drops:?} must lie within [1, {}]",
                self.epochs
            )));
        }
        self.augment.validate()
    }

    /// Drops that still fall inside `epochs`; used when the epoch budget is shortened.
    pub fn clamp_drops(mut self) -> Self {
        let epochs = self.epochs;
        self.lr_drop_epochs.retain(|&e| e <= epochs);
        self
    }
}

/// `lr0 * lr_factor ^ (number of drop epochs <= epoch)`, epochs 1-based.
pub fn lr_at_epoch(cfg: &TrainConfig, epoch: usize) -> Result<f32> {
    if epoch < 1 || epoch > cfg.epochs {
        return Err(invalid(format!("epoch {epoch} outside 1..={}", cfg.epochs)));
    }
    let drops = cfg.lr_drop_epochs.iter().filter(|&&e| e <= epoch).count();
    Ok((decimal(cfg.lr0) * decimal(cfg.lr_factor).powi(drops as i32)) as f32)
}

/// The f64 nearest the shortest decimal form of `v`, so 0.1 x 0.1 lands on 0.01.
fn decimal(v: f32) -> f64 {
    v.to_string().parse().expect("f32 display parses")
}
