//! Synthetic dataset, NULD round trip, PPM folder ingestion and augmentation.

use nulite::data::{
    augment, hflip, ingest_folder, read_native, synth_dataset, write_native, write_ppm, AugmentConfig, IngestOptions,
    RgbImage,
};
use nulite::Rng;

pub fn run_example(dir: &std::path::Path) -> nulite::Result<()> {
    let ds = synth_dataset(3, 2, &mut Rng::new(1))?;
    let mut bytes = Vec::new();
    write_native(&ds, &mut bytes)?;
    let back = read_native(&mut bytes.as_slice())?;
    assert_eq!(back, ds);
    println!("NULD: {} samples, {} classes, {} bytes", ds.len(), ds.num_classes(), bytes.len());

    // two class folders of non-square PPMs, resized to 256x256 on ingest
    for (class, rgb) in [("harbour", [20u8, 60, 200]), ("temple", [200, 40, 20])] {
        let class_dir = dir.join(class);
        std::fs::create_dir_all(&class_dir)?;
        for i in 0..3 {
            let img = RgbImage { width: 64, height: 32, pixels: (0..64 * 32).flat_map(|_| rgb).collect() };
            write_ppm(&img, &mut std::fs::File::create(class_dir.join(format!("{i}.ppm")))?)?;
        }
    }
    let ingested = ingest_folder(dir, &IngestOptions::default())?;
    println!("ingested classes {:?}, labels {:?}", ingested.class_names(), ingested.labels());

    let mut rng = Rng::new(2);
    let crop = augment(&ds.samples()[0].pixels, &AugmentConfig::default(), &mut rng)?;
    let center = augment(&ds.samples()[0].pixels, &AugmentConfig::center(), &mut rng)?;
    assert_eq!(hflip(&hflip(&crop)), crop);
    println!("augmented crop {:?}, center crop mean {:.4}", crop.dims(), center.sum() / center.len() as f64);
    Ok(())
}

fn main() -> nulite::Result<()> {
    let dir = std::env::temp_dir().join(format!("nulite-data-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let result = run_example(&dir);
    let _ = std::fs::remove_dir_all(&dir);
    result
}
