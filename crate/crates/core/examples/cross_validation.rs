//! Stratified 10-fold split of a 50-class label set, with per-fold sizes
//! and class coverage.

use nulite::train::kfold_split_labels;

pub fn run_example() -> nulite::Result<Vec<usize>> {
    // uneven classes, 4060 samples in total
    let labels: Vec<usize> = (0..4060).map(|i| (i * 7919) % 50).collect();
    let folds = kfold_split_labels(&labels, 50, 10, 0)?;
    let mut sizes = Vec::new();
    for (k, f) in folds.iter().enumerate() {
        let mut seen = [false; 50];
        f.test.iter().for_each(|&i| seen[labels[i]] = true);
        println!(
            "fold {:>2}: train {} test {} classes in test {}",
            k + 1,
            f.train.len(),
            f.test.len(),
            seen.iter().filter(|&&s| s).count()
        );
        sizes.push(f.test.len());
    }
    Ok(sizes)
}

fn main() -> nulite::Result<()> {
    run_example().map(|_| ())
}
