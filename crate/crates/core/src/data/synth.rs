use super::{Dataset, Sample, IMAGE_SIDE};
use crate::error::{invalid, Result};
use crate::tensor::Rng;

/// Fully saturated color at `hue` in `[0, 1)`.
fn hue_rgb(hue: f64) -> [f64; 3] {
    let h = hue * 6.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    match h as usize {
        0 => [1.0, x, 0.0],
        1 => [x, 1.0, 0.0],
        2 => [0.0, 1.0, x],
        3 => [0.0, x, 1.0],
        4 => [x, 0.0, 1.0],
        _ => [1.0, 0.0, x],
    }
}

/// Whether `(dx, dy)` (offset from the shape center) lies inside shape `kind`.
fn inside(kind: usize, dx: f64, dy: f64, r: f64) -> bool {
    match kind {
        0 => dx * dx + dy * dy <= r * r,
        1 => dx.abs() <= r && dy.abs() <= r,
        2 => dx.abs() + dy.abs() <= r * 1.3,
        _ => {
            let d = (dx * dx + dy * dy).sqrt();
            d <= r && d >= r * 0.55
        }
    }
}

/// Images with a class-specific color and shape on a dark noisy
/// background. Class `c` uses hue `c / classes` and one of four shapes
/// (disk, square, diamond, ring) chosen by `c % 4`; the shape center and
/// size are jittered per sample. Samples are grouped by class.
pub fn synth_dataset(classes: usize, per_class: usize, rng: &mut Rng) -> Result<Dataset> {
    if classes < 2 {
        return Err(invalid(format!("synthetic set needs >= 2 classes, got {classes}")));
    }
    if classes > u16::MAX as usize {
        return Err(invalid("too many classes"));
    }
    let side = IMAGE_SIDE as f64;
    let mut samples = Vec::with_capacity(classes * per_class);
    for label in 0..classes {
        let color = hue_rgb(label as f64 / classes as f64);
        let kind = label % 4;
        for _ in 0..per_class {
            let cx = side / 2.0 + (rng.uniform() - 0.5) * 48.0;
            let cy = side / 2.0 + (rng.uniform() - 0.5) * 48.0;
            let r = 56.0 + rng.uniform() * 24.0;
            let mut pixels = Vec::with_capacity(IMAGE_SIDE * IMAGE_SIDE * 3);
            for y in 0..IMAGE_SIDE {
                for x in 0..IMAGE_SIDE {
                    let fg = inside(kind, x as f64 + 0.5 - cx, y as f64 + 0.5 - cy, r);
                    for &c in &color {
                        let noise = rng.below(32) as f64;
                        let v = if fg { 40.0 + c * 200.0 - noise / 2.0 } else { noise };
                        pixels.push(v.round().clamp(0.0, 255.0) as u8);
                    }
                }
            }
            samples.push(Sample { label, pixels });
        }
    }
    let names = (0..classes).map(|c| format!("class_{c:02}")).collect();
    Dataset::new(names, samples)
}
