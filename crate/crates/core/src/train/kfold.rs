use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::tensor::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    /// Ascending sample indices.
    pub train: Vec<usize>,
    /// Ascending sample indices.
    pub test: Vec<usize>,
}

/// Stratified split of `labels` into `folds` disjoint test sets.
///
/// Each class's indices are shuffled, then dealt to folds round-robin with
/// a cursor that carries over between classes, so every class is spread
/// evenly and fold sizes differ by at most one.
pub fn kfold_split_labels(labels: &[usize], num_classes: usize, folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(invalid(format!("folds must be >= 2, got {folds}")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class
            .get_mut(l)
            .ok_or_else(|| invalid(format!("label {l} out of range for {num_classes} classes")))?
            .push(i);
    }
    if let Some((c, members)) = by_class.iter().enumerate().find(|(_, m)| m.len() < folds) {
        return Err(Error::Data(format!(
            "class {c} has {} samples, fewer than {folds} folds",
            members.len()
        )));
    }
    let mut rng = Rng::new(seed);
    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); folds];
    let mut cursor = 0;
    for mut members in by_class {
        rng.shuffle(&mut members);
        for i in members {
            tests[cursor].push(i);
            cursor = (cursor + 1) % folds;
        }
    }
    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut is_test = vec![false; labels.len()];
            test.iter().for_each(|&i| is_test[i] = true);
            let train = (0..labels.len()).filter(|&i| !is_test[i]).collect();
            Fold { train, test }
        })
        .collect())
}

pub fn kfold_split(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<Fold>> {
    kfold_split_labels(&data.labels(), data.num_classes(), folds, seed)
}
