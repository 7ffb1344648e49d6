//! Overfits NU-LiteNet-A on a small synthetic set and prints the epoch log.
//!
//! `cargo run --release --example train_synthetic -- [epochs] [batch] [lr]`

use std::ops::ControlFlow;
use std::time::Instant;

use nulite::architectures::Arch;
use nulite::data::synth_dataset;
use nulite::train::{train_split, TrainConfig};
use nulite::Rng;

pub fn run_example(epochs: usize, batch: usize, lr: f32) -> nulite::Result<f64> {

    let data = synth_dataset(2, 20, &mut Rng::new(7))?;
    let graph = Arch::NuLiteA.build(data.num_classes())?;
    let cfg = TrainConfig {
        lr0: lr,
        epochs,
        batch_size: batch,
        lr_drop_epochs: vec![],
        seed: 1,
        ..TrainConfig::default()
    };
    let all: Vec<usize> = (0..data.len()).collect();
    let start = Instant::now();
    println!("epoch,lr,train_loss,top1,top5,seconds");
    let run = train_split(&graph, &data, &all, &all, &cfg, &mut |r| {
        println!(
            "{},{},{:.6},{:.4},{:.4},{:.1}",
            r.epoch,
            r.lr,
            r.train_loss,
            r.top1,
            r.top5,
            start.elapsed().as_secs_f64()
        );
        ControlFlow::Continue(())
    })?;
    println!("optimizer steps: {}", run.steps);
    Ok(run.last().map_or(0.0, |r| r.top1))
}

fn main() -> nulite::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let epochs = arg(0, "20").parse().expect("epochs");
    let batch = arg(1, "128").parse().expect("batch");
    let lr = arg(2, "0.01").parse().expect("lr");
    run_example(epochs, batch, lr).map(|_| ())
}
