use super::{IMAGE_BYTES, IMAGE_SIDE};
use crate::error::{invalid, Result};
use crate::tensor::{Rng, Tensor4};

pub const CROP_SIDE: usize = 224;

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentConfig {
    pub crop: usize,
    pub hflip_prob: f64,
    /// When false every image gets the deterministic center crop, unflipped.
    pub enabled: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            crop: CROP_SIDE,
            hflip_prob: 0.5,
            enabled: true,
        }
    }
}

impl AugmentConfig {
    pub fn center() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.crop == 0 || self.crop > IMAGE_SIDE {
            return Err(invalid(format!("crop {} must be in 1..={IMAGE_SIDE}", self.crop)));
        }
        if !(0.0..=1.0).contains(&self.hflip_prob) {
            return Err(invalid(format!("hflip_prob {} must be in [0,1]", self.hflip_prob)));
        }
        Ok(())
    }

    /// Top-left offset of the center crop.
    pub fn center_offset(&self) -> usize {
        (IMAGE_SIDE - self.crop) / 2
    }
}

/// Writes one `(3, crop, crop)` CHW crop scaled to `[0, 1]` into `out`.
///
/// Draw order when enabled: row offset, column offset (each uniform in
/// `0..=256-crop`), then the flip coin.
pub fn augment_into(pixels: &[u8], cfg: &AugmentConfig, rng: &mut Rng, out: &mut [f32]) -> Result<()> {
    cfg.validate()?;
    if pixels.len() != IMAGE_BYTES {
        return Err(invalid(format!(
            "augment expects a 256x256x3 image ({IMAGE_BYTES} bytes), got {}",
            pixels.len()
        )));
    }
    let crop = cfg.crop;
    if out.len() != 3 * crop * crop {
        return Err(invalid("augment output buffer has the wrong length"));
    }
    let (oy, ox, flip) = if cfg.enabled {
        let span = (IMAGE_SIDE - crop + 1) as u64;
        let oy = rng.below(span) as usize;
        let ox = rng.below(span) as usize;
        (oy, ox, rng.bernoulli(cfg.hflip_prob))
    } else {
        (cfg.center_offset(), cfg.center_offset(), false)
    };
    for y in 0..crop {
        let row = &pixels[((oy + y) * IMAGE_SIDE + ox) * 3..((oy + y) * IMAGE_SIDE + ox + crop) * 3];
        for x in 0..crop {
            let sx = if flip { crop - 1 - x } else { x };
            for ch in 0..3 {
                out[(ch * crop + y) * crop + x] = row[sx * 3 + ch] as f32 / 255.0;
            }
        }
    }
    Ok(())
}

/// Single augmented crop as a `(1, 3, crop, crop)` tensor.
pub fn augment(pixels: &[u8], cfg: &AugmentConfig, rng: &mut Rng) -> Result<Tensor4> {
    let mut t = Tensor4::zeros([1, 3, cfg.crop.max(1), cfg.crop.max(1)])?;
    augment_into(pixels, cfg, rng, t.data_mut())?;
    Ok(t)
}

/// Mirrors every row of every plane.
pub fn hflip(t: &Tensor4) -> Tensor4 {
    let mut out = t.clone();
    for row in out.data_mut().chunks_mut(t.w()) {
        row.reverse();
    }
    out
}
