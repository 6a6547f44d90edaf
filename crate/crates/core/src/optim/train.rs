//! The training loop and the store-to-tensor preparation in front of it.
//!
//! A run is: seed the stream, initialize both projections, then for each
//! epoch shuffle the training items (Fisher–Yates), walk them in batches,
//! rebuild the class banks, take one Adam step per batch on the overall loss,
//! and score val top-1 with the current parameters. Model selection keeps the
//! parameters of the best val epoch (earliest on ties); without a val set the
//! final parameters win. Everything is single-threaded and reduced in fixed
//! index order, so a (config, seed) pair reproduces bitwise.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::adam::{adam_step, AdamState, OptimError};
use super::schedule::lr_at;
use crate::align::{
    assemble_class_text, build_class_bank, encode_visual, overall_loss, predict, AlignError,
    AlignmentParams, Batch, ClassTextFeatures,
};
use crate::matrix::Mat;
use crate::rng::{self, ChaCha12Rng, RngSnapshot};
use crate::types::{ConfigError, DataError, FeatureStore, RunConfig, ZsarSplit};
use rand::SeedableRng;

/// Videos to score against the unseen bank, labels already mapped to
/// unseen-bank row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSet {
    pub item_ids: Vec<String>,
    pub videos_raw: Mat,
    pub labels: Vec<usize>,
}

/// Everything `train` consumes, in tensor form. Built by
/// `prepare_training`, which owns all id-to-index mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainData {
    pub seen_class_ids: Vec<u32>,
    pub unseen_class_ids: Vec<u32>,
    pub train_videos: Mat,
    pub train_labels: Vec<usize>,
    pub seen_text: ClassTextFeatures,
    pub unseen_text: ClassTextFeatures,
    /// Present iff the config's gamma is positive; covers the split's cycle
    /// class set (by default, the unseen classes).
    pub cycle_text: Option<ClassTextFeatures>,
    pub val: Option<EvalSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPart {
    Val,
    Test,
}

fn build_eval_set(
    videos: &FeatureStore,
    items: &alloc::collections::BTreeSet<String>,
    unseen_ids: &[u32],
) -> EvalSet {
    let index_of_class = |label: u32| unseen_ids.binary_search(&label).expect("validated label");
    let mut item_ids = Vec::with_capacity(items.len());
    let mut rows = Vec::with_capacity(items.len());
    let mut labels = Vec::with_capacity(items.len());
    for id in items {
        let row = videos.index_of(id).expect("validated item");
        item_ids.push(id.clone());
        rows.push(row);
        labels.push(index_of_class(videos.labels()[row]));
    }
    EvalSet { item_ids, videos_raw: videos.features().gather_rows(&rows), labels }
}

/// Map stores and a split into training tensors. Validates the split, every
/// item's membership and label side, and that the pieces the config needs
/// (descriptions for alpha < 1, unseen classes, cycle classes for gamma > 0)
/// are actually present.
pub fn prepare_training(
    cfg: &RunConfig,
    videos: &FeatureStore,
    definitions: &FeatureStore,
    descriptions: Option<&FeatureStore>,
    split: &ZsarSplit,
) -> Result<TrainData, DataError> {
    split.validate()?;
    split.validate_items(videos)?;
    if split.seen_classes.is_empty() {
        return Err(DataError::EmptySet { which: "seen" });
    }
    if split.unseen_classes.is_empty() {
        return Err(DataError::EmptySet { which: "unseen" });
    }
    if cfg.alpha < 1.0 && descriptions.is_none() {
        return Err(DataError::MissingDescriptionStore);
    }

    let seen_class_ids: Vec<u32> = split.seen_classes.iter().copied().collect();
    let unseen_class_ids: Vec<u32> = split.unseen_classes.iter().copied().collect();

    let mut rows = Vec::with_capacity(split.train_items.len());
    let mut train_labels = Vec::with_capacity(split.train_items.len());
    for id in &split.train_items {
        let row = videos.index_of(id).expect("validated item");
        rows.push(row);
        let label = videos.labels()[row];
        train_labels.push(seen_class_ids.binary_search(&label).expect("validated label"));
    }
    let train_videos = videos.features().gather_rows(&rows);

    let seen_text = assemble_class_text(definitions, descriptions, &split.seen_classes, cfg.k)?;
    let unseen_text =
        assemble_class_text(definitions, descriptions, &split.unseen_classes, cfg.k)?;
    let cycle_text = if cfg.gamma > 0.0 {
        Some(assemble_class_text(definitions, descriptions, split.cycle_classes(), cfg.k)?)
    } else {
        None
    };
    let val = if split.val_items.is_empty() {
        None
    } else {
        Some(build_eval_set(videos, &split.val_items, &unseen_class_ids))
    };

    Ok(TrainData {
        seen_class_ids,
        unseen_class_ids,
        train_videos,
        train_labels,
        seen_text,
        unseen_text,
        cycle_text,
        val,
    })
}

/// The val or test items of a split as an evaluation set against the unseen
/// classes. Runs the same validation as `prepare_training`.
pub fn prepare_eval_set(
    videos: &FeatureStore,
    split: &ZsarSplit,
    part: EvalPart,
) -> Result<EvalSet, DataError> {
    split.validate()?;
    split.validate_items(videos)?;
    if split.unseen_classes.is_empty() {
        return Err(DataError::EmptySet { which: "unseen" });
    }
    let unseen_ids: Vec<u32> = split.unseen_classes.iter().copied().collect();
    let items = match part {
        EvalPart::Val => &split.val_items,
        EvalPart::Test => &split.test_items,
    };
    Ok(build_eval_set(videos, items, &unseen_ids))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Per-item mean of the overall loss across the epoch's batches.
    pub mean_loss: f64,
    /// Rate used on the epoch's final step.
    pub last_lr: f64,
    pub val_top1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Selected parameters: best val epoch, or the final ones without val.
    pub params: AlignmentParams,
    /// Optimizer and stream state at the end of the run (not the selected
    /// epoch) — provenance, not a resume point for the selected params.
    pub adam: AdamState,
    pub rng: RngSnapshot,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    Config(ConfigError),
    /// The objective failed (non-finite values, missing inputs, bad labels).
    Step { step: usize, visual_norm: f64, semantic_norm: f64, source: AlignError },
    Optim { step: usize, source: OptimError },
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Config(e) => write!(f, "{e}"),
            TrainError::Step { step, visual_norm, semantic_norm, source } => write!(
                f,
                "step {step}: {source} (visual weight norm {visual_norm:.6e}, \
                 semantic weight norm {semantic_norm:.6e})"
            ),
            TrainError::Optim { step, source } => write!(f, "step {step}: {source}"),
        }
    }
}

impl core::error::Error for TrainError {}

fn val_top1(
    params: &AlignmentParams,
    data: &TrainData,
    set: &EvalSet,
) -> Result<f64, AlignError> {
    let bank = build_class_bank(params, &data.unseen_text)?;
    let videos = encode_visual(params, &set.videos_raw)?;
    let preds = predict(&videos, &bank)?;
    let correct = preds
        .top1()
        .iter()
        .zip(&set.labels)
        .filter(|(got, want)| got == want)
        .count();
    Ok(correct as f64 / set.labels.len() as f64)
}

/// Run the full loop. `on_epoch` fires after each epoch's record is final —
/// the hook for progress logging.
pub fn train(
    cfg: &RunConfig,
    data: &TrainData,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome, TrainError> {
    cfg.validate().map_err(TrainError::Config)?;
    let n = data.train_videos.rows();
    let step_error = |step: usize, params: &AlignmentParams, source: AlignError| {
        TrainError::Step {
            step,
            visual_norm: params.visual.weight.norm(),
            semantic_norm: params.semantic.weight.norm(),
            source,
        }
    };

    let mut stream = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut params = AlignmentParams::init(
        cfg,
        data.train_videos.cols(),
        data.seen_text.definitions.cols(),
        &mut stream,
    );
    if n == 0 {
        return Err(step_error(0, &params, AlignError::EmptyBatch));
    }
    let mut adam = AdamState::new(cfg, &params);

    let steps_per_epoch = n.div_ceil(cfg.batch_size);
    let total_steps = cfg.epochs * steps_per_epoch;
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(usize, f64, AlignmentParams)> = None;
    let mut epochs_without_improvement = 0usize;
    let mut stopped_early = false;

    for epoch in 0..cfg.epochs {
        rng::shuffle(&mut stream, &mut order);
        let mut loss_accum = 0.0;
        let mut last_lr = 0.0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let step = epoch * steps_per_epoch + b;
            last_lr = lr_at(step, total_steps, cfg.lr, cfg.warmup_fraction);
            let batch_videos = data.train_videos.gather_rows(chunk);
            let batch_labels: Vec<usize> = chunk.iter().map(|&i| data.train_labels[i]).collect();
            let batch = Batch { videos_raw: &batch_videos, labels: &batch_labels };
            let (breakdown, grads) = overall_loss(
                &params,
                &batch,
                &data.seen_text,
                data.cycle_text.as_ref(),
                cfg.reduction,
            )
            .map_err(|e| step_error(step, &params, e))?;
            loss_accum += match cfg.reduction {
                crate::types::Reduction::Mean => breakdown.total * chunk.len() as f64,
                crate::types::Reduction::Sum => breakdown.total,
            };
            adam_step(&mut params, &grads, &mut adam, last_lr, cfg.weight_decay, cfg.decoupled_weight_decay)
                .map_err(|source| TrainError::Optim { step, source })?;
        }

        let val = match &data.val {
            Some(set) => Some(
                val_top1(&params, data, set)
                    .map_err(|e| step_error((epoch + 1) * steps_per_epoch - 1, &params, e))?,
            ),
            None => None,
        };
        let record = EpochRecord {
            epoch,
            mean_loss: loss_accum / n as f64,
            last_lr,
            val_top1: val,
        };
        on_epoch(&record);
        history.push(record);

        if let Some(v) = val {
            let improved = best.as_ref().map_or(true, |(_, bv, _)| v > *bv);
            if improved {
                best = Some((epoch, v, params.clone()));
                epochs_without_improvement = 0;
            } else {
                epochs_without_improvement += 1;
                if cfg.patience > 0 && epochs_without_improvement >= cfg.patience {
                    stopped_early = true;
                    break;
                }
            }
        }
    }

    let (selected, best_epoch) = match best {
        Some((epoch, _, p)) => (p, Some(epoch)),
        None => (params, None),
    };
    Ok(TrainOutcome {
        params: selected,
        adam,
        rng: RngSnapshot::capture(&stream),
        history,
        best_epoch,
        stopped_early,
    })
}
