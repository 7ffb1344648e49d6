//! Channel arithmetic of the two NU-Lite block variants.

use nulite::architectures::{build_nu_lite_block, NuLiteBlockSpec, Variant};

pub fn run_example() -> nulite::Result<()> {
    println!("variant  N  squeeze  branch  out  params  output dims at 14x14");
    for n in [8, 64, 128, 256] {
        for variant in [Variant::A, Variant::B] {
            let spec = NuLiteBlockSpec::new(variant, n)?;
            let frag = build_nu_lite_block(&spec, "in", "blk");
            let shapes = frag.propagate([n, 14, 14])?;
            let out = shapes.last().copied().unwrap_or_default();
            println!(
                "{:?}  {n:>5}  {:>7}  {:>6}  {:>3}  {:>6}  {:?}",
                variant,
                spec.squeeze_width(),
                spec.branch_width(),
                spec.out_channels(),
                spec.param_count(),
                out
            );
        }
    }
    // variant A needs N divisible by 4
    assert!(NuLiteBlockSpec::new(Variant::A, 6).is_err());
    Ok(())
}

fn main() -> nulite::Result<()> {
    run_example()
}
