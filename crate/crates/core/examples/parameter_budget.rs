//! Parameter and MAC totals for each architecture at 50 and 12 classes,
//! next to the published parameter counts.

use nulite::architectures::{count_macs, count_params, Arch};

pub fn run_example() -> nulite::Result<Vec<(Arch, usize, usize, u64)>> {
    let published = |arch: Arch, classes: usize| match (arch, classes) {
        (Arch::NuLiteA, 50) => 0.28,
        (Arch::NuLiteA, _) => 0.27,
        (Arch::NuLiteB, 50) => 0.94,
        (Arch::NuLiteB, _) => 0.93,
        (Arch::SqueezeNet, 50) => 0.75,
        (Arch::SqueezeNet, _) => 0.74,
    };
    println!("{:<11} {:>7} {:>10} {:>9} {:>10} {:>14}", "arch", "classes", "params", "millions", "published", "MACs");
    let mut rows = Vec::new();
    for arch in Arch::ALL {
        for classes in [50, 12] {
            let g = arch.build(classes)?;
            let p = count_params(&g)?;
            let macs = count_macs(&g)?.total_macs;
            println!(
                "{:<11} {:>7} {:>10} {:>9.4} {:>10} {:>14}",
                arch.id(),
                classes,
                p.total_params,
                p.params_millions(),
                published(arch, classes),
                macs
            );
            rows.push((arch, classes, p.total_params, macs));
        }
    }
    Ok(rows)
}

fn main() -> nulite::Result<()> {
    run_example().map(|_| ())
}
