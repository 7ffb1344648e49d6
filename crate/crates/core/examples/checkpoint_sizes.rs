//! Saves a freshly initialized model of each architecture and reports the
//! checkpoint size.

use nulite::architectures::Arch;
use nulite::store::{load_checkpoint, save_checkpoint};
use nulite::Network;

pub fn run_example(dir: &std::path::Path) -> nulite::Result<Vec<(Arch, u64)>> {
    let mut sizes = Vec::new();
    for arch in Arch::ALL {
        let net = Network::from_arch(arch, 50, 0)?;
        let path = dir.join(format!("{arch}.nult"));
        save_checkpoint(&net, &path)?;
        let bytes = std::fs::metadata(&path)?.len();
        let back = load_checkpoint(&path)?;
        assert_eq!(back.param_count(), net.param_count());
        println!(
            "{:<11} params {:>7} running stats {:>5} file {:>8} bytes = {:.3} MiB",
            arch.id(),
            net.param_count(),
            net.running_stat_count(),
            bytes,
            bytes as f64 / (1024.0 * 1024.0)
        );
        sizes.push((arch, bytes));
    }
    Ok(sizes)
}

fn main() -> nulite::Result<()> {
    let dir = std::env::temp_dir().join(format!("nulite-sizes-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let result = run_example(&dir);
    let _ = std::fs::remove_dir_all(&dir);
    result.map(|_| ())
}
