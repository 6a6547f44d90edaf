//! Optimization: Adam with bias correction, the warmup-then-cosine learning
//! rate schedule, and the deterministic training loop.

mod adam;
mod schedule;
mod train;

pub use adam::{adam_step, AdamState, OptimError};
pub use schedule::lr_at;
pub use train::{
    prepare_eval_set, prepare_training, train, EpochRecord, EvalPart, EvalSet, TrainData,
    TrainError, TrainOutcome,
};
