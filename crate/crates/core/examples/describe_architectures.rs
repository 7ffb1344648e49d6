//! Prints the stage and layer tables of every architecture.
//!
//! `cargo run --example describe_architectures -- [classes]`

use nulite::architectures::{describe, Arch};

pub fn run_example(classes: usize) -> nulite::Result<String> {
    let mut out = String::new();
    for arch in Arch::ALL {
        out.push_str(&describe(&arch.build(classes)?)?);
        out.push('\n');
    }
    Ok(out)
}

fn main() -> nulite::Result<()> {
    let classes = std::env::args().nth(1).map_or(50, |s| s.parse().expect("class count"));
    print!("{}", run_example(classes)?);
    Ok(())
}
