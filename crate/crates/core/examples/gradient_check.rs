//! Compares analytic convolution gradients with central differences.

use nulite::layers::{conv2d_backward, conv2d_forward, ConvParams};
use nulite::{Rng, Tensor4};

fn probe(y: &Tensor4, r: &Tensor4) -> f64 {
    y.data().iter().zip(r.data()).map(|(&a, &b)| a as f64 * b as f64).sum()
}

/// Worst norm-wise relative error over the input gradients, per kernel size.
pub fn run_example() -> nulite::Result<Vec<(usize, f64)>> {
    let mut rng = Rng::new(3);
    let mut worst = Vec::new();
    for kernel in [1, 3, 5, 7] {
        let x = Tensor4::randn([2, 3, 9, 9], 1.0, &mut rng)?;
        let p = ConvParams::init(3, 4, kernel, 1, kernel / 2, true, &mut rng)?;
        let y = conv2d_forward(&x, &p)?;
        let r = Tensor4::randn(y.dims(), 1.0, &mut rng)?;
        let g = conv2d_backward(&x, &p, &r)?;

        let h = 1e-2f32;
        let mut xs = x.clone();
        let (mut num, mut diff) = (0.0f64, 0.0f64);
        for i in 0..x.len() {
            let orig = xs.data()[i];
            xs.data_mut()[i] = orig + h;
            let up = probe(&conv2d_forward(&xs, &p)?, &r);
            xs.data_mut()[i] = orig - h;
            let down = probe(&conv2d_forward(&xs, &p)?, &r);
            xs.data_mut()[i] = orig;
            let n = (up - down) / (2.0 * h as f64);
            num += n * n;
            diff += (n - g.grad_x.data()[i] as f64).powi(2);
        }
        let rel = diff.sqrt() / num.sqrt();
        println!("conv {kernel}x{kernel}: relative error {rel:.2e}");
        worst.push((kernel, rel));
    }
    Ok(worst)
}

fn main() -> nulite::Result<()> {
    run_example().map(|_| ())
}
