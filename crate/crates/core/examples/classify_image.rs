//! Ranks the classes for one synthetic image with an untrained SqueezeNet
//! and an untrained NU-LiteNet-A, through the same path `nulite classify` uses.

use nulite::architectures::Arch;
use nulite::data::{augment, synth_dataset, AugmentConfig};
use nulite::{Network, Rng};

pub fn run_example() -> nulite::Result<()> {
    let ds = synth_dataset(4, 1, &mut Rng::new(9))?;
    let x = augment(&ds.samples()[2].pixels, &AugmentConfig::center(), &mut Rng::new(0))?;
    for arch in [Arch::NuLiteA, Arch::SqueezeNet] {
        let net = Network::from_arch(arch, ds.num_classes(), 4)?;
        let probs = net.predict(&x)?;
        let mut ranked: Vec<(usize, f32)> = probs.data().iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        println!("{arch}:");
        for (c, p) in ranked {
            println!("  {} {p:.4}", ds.class_names()[c]);
        }
    }
    Ok(())
}

fn main() -> nulite::Result<()> {
    run_example()
}
