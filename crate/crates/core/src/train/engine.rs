use std::fmt::Write as _;
use std::ops::ControlFlow;

use super::{kfold_split, lr_at_epoch, top_k_accuracy, OptimizerState, TrainConfig};
use crate::architectures::NetGraph;
use crate::data::{augment_into, AugmentConfig, Dataset};
use crate::error::{Error, Result};
use crate::model::Network;
use crate::tensor::{Rng, Tensor4};

/// Batch size used for evaluation forward passes.
pub const EVAL_BATCH: usize = 32;

pub const EPOCH_CSV_HEADER: &str = "epoch,lr,train_loss,val_top1,val_top5";

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub lr: f32,
    /// Mean per-sample training loss over the epoch.
    pub train_loss: f64,
    pub top1: f64,
    /// Top-min(5, classes).
    pub top5: f64,
}

/// Header plus one line per record.
pub fn epoch_csv(records: &[EpochRecord]) -> String {
    let mut out = format!("{EPOCH_CSV_HEADER}\n");
    for r in records {
        writeln!(out, "{},{},{:.6},{:.6},{:.6}", r.epoch, r.lr, r.train_loss, r.top1, r.top5).unwrap();
    }
    out
}

pub struct TrainOutcome {
    pub network: Network,
    pub records: Vec<EpochRecord>,
    /// Optimizer updates applied to each learnable tensor.
    pub steps: u64,
}

impl TrainOutcome {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

pub struct FoldOutcome {
    pub fold: usize,
    pub outcome: TrainOutcome,
}

/// Stacks the crops of `indices` into one `(N, 3, crop, crop)` batch.
fn make_batch(data: &Dataset, indices: &[usize], cfg: &AugmentConfig, rng: &mut Rng) -> Result<(Tensor4, Vec<usize>)> {
    let mut x = Tensor4::zeros([indices.len(), 3, cfg.crop, cfg.crop])?;
    let mut labels = Vec::with_capacity(indices.len());
    for (slot, &i) in indices.iter().enumerate() {
        let s = &data.samples()[i];
        augment_into(&s.pixels, cfg, rng, x.sample_mut(slot))?;
        labels.push(s.label);
    }
    Ok((x, labels))
}

fn check_data(graph: &NetGraph, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Data("dataset is empty".into()));
    }
    if data.num_classes() != graph.num_classes() {
        return Err(Error::Data(format!(
            "dataset has {} classes but the {} model has {}",
            data.num_classes(),
            graph.arch(),
            graph.num_classes()
        )));
    }
    Ok(())
}

/// Top-1 and top-5 of `net` on `indices`, eval-mode BN, center crops.
pub fn evaluate(net: &Network, data: &Dataset, indices: &[usize]) -> Result<(f64, f64)> {
    if indices.is_empty() {
        return Err(Error::Data("evaluation set is empty".into()));
    }
    if data.num_classes() != net.num_classes() {
        return Err(Error::Data(format!(
            "dataset has {} classes but the model has {}",
            data.num_classes(),
            net.num_classes()
        )));
    }
    let center = AugmentConfig {
        crop: net.graph().input_dims()[1],
        ..AugmentConfig::center()
    };
    let k5 = net.num_classes().min(5);
    let (mut hits1, mut hits5) = (0.0, 0.0);
    let mut unused = Rng::new(0);
    for chunk in indices.chunks(EVAL_BATCH) {
        let (x, labels) = make_batch(data, chunk, &center, &mut unused)?;
        let probs = net.predict(&x)?;
        hits1 += top_k_accuracy(&probs, &labels, 1)? * chunk.len() as f64;
        hits5 += top_k_accuracy(&probs, &labels, k5)? * chunk.len() as f64;
    }
    let n = indices.len() as f64;
    Ok((hits1 / n, hits5 / n))
}

/// Trains a freshly initialized network on `train` and evaluates it on
/// `eval` after every epoch. `observer` sees each record and may stop the run.
///
/// All randomness derives from `cfg.seed`: parameter init, batch order and
/// augmentation draw from separate forks of one generator.
pub fn train_split(
    graph: &NetGraph,
    data: &Dataset,
    train: &[usize],
    eval: &[usize],
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(&EpochRecord) -> ControlFlow<()>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_data(graph, data)?;
    if train.is_empty() || eval.is_empty() {
        return Err(Error::Data("training and evaluation sets must be nonempty".into()));
    }
    let mut root = Rng::new(cfg.seed);
    let mut net = Network::new(graph.clone(), &mut root.fork())?;
    let mut order_rng = root.fork();
    let mut aug_rng = root.fork();
    let augment = AugmentConfig {
        crop: graph.input_dims()[1],
        ..cfg.augment.clone()
    };

    let mut opt = OptimizerState::new();
    let mut order = train.to_vec();
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut steps = 0;
    for epoch in 1..=cfg.epochs {
        let lr = lr_at_epoch(cfg, epoch)?;
        order_rng.shuffle(&mut order);
        let mut loss_sum = 0.0f64;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let (x, labels) = make_batch(data, chunk, &augment, &mut aug_rng)?;
            let pass = net.forward_train(&x)?;
            let (loss, grads) = net.backward(pass, &labels).map_err(|e| match e {
                Error::NonFinite(what) => Error::NonFinite(format!("{what} at epoch {epoch}, batch {}", b + 1)),
                other => other,
            })?;
            opt.step(&mut net, &grads, lr, cfg.momentum, cfg.weight_decay)?;
            steps += 1;
            loss_sum += loss as f64 * chunk.len() as f64;
        }
        net.ensure_finite()
            .map_err(|e| Error::NonFinite(format!("{e} after epoch {epoch}")))?;
        let (top1, top5) = evaluate(&net, data, eval)?;
        let record = EpochRecord {
            epoch,
            lr,
            train_loss: loss_sum / order.len() as f64,
            top1,
            top5,
        };
        let flow = observer(&record);
        records.push(record);
        if flow.is_break() {
            break;
        }
    }
    Ok(TrainOutcome {
        network: net,
        records,
        steps,
    })
}

/// Trains on the whole dataset and reports accuracy on the same samples.
pub fn train_model(graph: &NetGraph, data: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let all: Vec<usize> = (0..data.len()).collect();
    train_split(graph, data, &all, &all, cfg, &mut |_| ControlFlow::Continue(()))
}

/// Stratified k-fold protocol: one independent run per fold, each seeded
/// with `cfg.seed + fold`. The split itself uses `cfg.seed`.
pub fn train_kfold(
    graph: &NetGraph,
    data: &Dataset,
    folds: usize,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(usize, &EpochRecord) -> ControlFlow<()>,
) -> Result<Vec<FoldOutcome>> {
    check_data(graph, data)?;
    let splits = kfold_split(data, folds, cfg.seed)?;
    let mut out = Vec::with_capacity(folds);
    for (fold, split) in splits.iter().enumerate() {
        let fold_cfg = TrainConfig {
            seed: cfg.seed.wrapping_add(fold as u64),
            ..cfg.clone()
        };
        let outcome = train_split(graph, data, &split.train, &split.test, &fold_cfg, &mut |r| observer(fold, r))?;
        out.push(FoldOutcome { fold, outcome });
    }
    Ok(out)
}

/// Mean final top-1 and top-5 across folds.
pub fn mean_final_accuracy(folds: &[FoldOutcome]) -> Option<(f64, f64)> {
    let finals: Vec<&EpochRecord> = folds.iter().filter_map(|f| f.outcome.last()).collect();
    if finals.is_empty() {
        return None;
    }
    let n = finals.len() as f64;
    Some((
        finals.iter().map(|r| r.top1).sum::<f64>() / n,
        finals.iter().map(|r| r.top5).sum::<f64>() / n,
    ))
}
