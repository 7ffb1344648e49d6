//! Momentum SGD training with a step learning-rate schedule, top-k metrics
//! and a stratified k-fold protocol.

mod config;
mod engine;
mod kfold;
mod metrics;
mod sgd;

pub use config::{lr_at_epoch, TrainConfig};
pub use engine::{
    epoch_csv, evaluate, mean_final_accuracy, train_kfold, train_model, train_split, EpochRecord, FoldOutcome,
    TrainOutcome, EPOCH_CSV_HEADER, EVAL_BATCH,
};
pub use kfold::{kfold_split, kfold_split_labels, Fold};
pub use metrics::{in_top_k, top_k_accuracy};
pub use sgd::{sgd_step, OptimizerState};
