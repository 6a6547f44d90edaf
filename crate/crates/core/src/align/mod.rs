//! Cross-modality alignment: the model itself.
//!
//! Two affine projections map precomputed backbone features into a shared
//! d-dimensional space: one for videos, one shared by both text sources
//! (definitions and descriptions). A class's content feature is the mean of
//! its projected descriptions; its fused feature interpolates definition and
//! content with weight alpha. Training aligns videos to definition features,
//! to content features, and — through a two-hop attention cycle over the
//! unseen-class bank — to cycle-reconstructed seen features, all with the
//! same temperature-scaled contrastive loss.
//!
//! The alpha endpoints are exact switches: alpha = 1 never touches
//! description features, alpha = 0 never uses definition features, and
//! gamma = 0 skips the cycle entirely. Ablations rely on this being literal.

mod cycle;
mod fdcheck;
mod loss;
mod objective;
mod predict;

pub use cycle::{cycle_reconstruct, CycleFeatures};
pub use fdcheck::{finite_difference_check, FdReport};
pub use loss::{contrastive_loss, contrastive_loss_value, softmax_rows, ContrastiveGrads};
pub use objective::{overall_loss, overall_loss_value, Batch, LossBreakdown, ParamGrads};
pub use predict::{predict, Predictions};

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::matrix::Mat;
use crate::rng::ChaCha12Rng;
use crate::types::{DataError, FeatureStore, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum AlignError {
    DimMismatch { what: &'static str, got: usize, want: usize },
    NonFinite { site: &'static str, row: usize, col: usize },
    EmptyBatch,
    EmptyClassSet { which: &'static str },
    /// Batch label outside the seen bank.
    BadLabel { index: usize, label: usize, classes: usize },
    /// alpha < 1 needs content features but no description groups were given.
    MissingDescriptions,
    /// A class whose description group is empty cannot have a content
    /// feature; run with alpha = 1 (definition-only) or supply descriptions.
    NoDescriptions { class_index: usize },
    /// gamma > 0 needs text features for the cycle class set.
    MissingCycleBank,
}

impl fmt::Display for AlignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlignError::DimMismatch { what, got, want } => {
                write!(f, "{what}: dimension {got}, expected {want}")
            }
            AlignError::NonFinite { site, row, col } => {
                write!(f, "non-finite value in {site} at row {row}, column {col}")
            }
            AlignError::EmptyBatch => write!(f, "batch contains no videos"),
            AlignError::EmptyClassSet { which } => write!(f, "{which} class set is empty"),
            AlignError::BadLabel { index, label, classes } => {
                write!(f, "batch item {index} has label {label}, bank holds {classes} classes")
            }
            AlignError::MissingDescriptions => {
                write!(f, "alpha < 1 requires description features, but none were provided")
            }
            AlignError::NoDescriptions { class_index } => {
                write!(
                    f,
                    "class at index {class_index} has no descriptions; \
                     use alpha = 1 (definition-only) or provide descriptions for it"
                )
            }
            AlignError::MissingCycleBank => {
                write!(f, "gamma > 0 requires text features for the cycle class set")
            }
        }
    }
}

impl core::error::Error for AlignError {}

/// Affine map x ↦ x·W + b with W of shape d_in × d.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub weight: Mat,
    pub bias: Vec<f64>,
}

impl Projection {
    pub fn zeros(d_in: usize, d: usize) -> Self {
        Projection { weight: Mat::zeros(d_in, d), bias: vec![0.0; d] }
    }

    /// Uniform init in ±1/sqrt(d_in), bias zero. Consumes exactly
    /// d_in·d draws in row-major order.
    pub fn init(d_in: usize, d: usize, rng: &mut ChaCha12Rng) -> Self {
        let bound = 1.0 / libm::sqrt(d_in as f64);
        let weight =
            Mat::from_vec(d_in, d, crate::rng::uniform_vec(rng, d_in * d, -bound, bound));
        Projection { weight, bias: vec![0.0; d] }
    }

    pub fn d_in(&self) -> usize {
        self.weight.rows()
    }

    pub fn d_out(&self) -> usize {
        self.weight.cols()
    }

    pub fn apply(&self, x: &Mat) -> Mat {
        let mut out = x.matmul(&self.weight);
        out.add_row_vec(&self.bias);
        out
    }
}

/// All trainable state plus the hyperparameters inference needs. Carried
/// whole through checkpoints so evaluation cannot drift from training.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentParams {
    pub visual: Projection,
    pub semantic: Projection,
    pub tau: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub l2_normalize: bool,
}

pub const PARAM_BLOCKS: [&str; 4] =
    ["visual_weight", "visual_bias", "semantic_weight", "semantic_bias"];

impl AlignmentParams {
    /// Seeded init: visual projection first, then semantic.
    pub fn init(
        cfg: &RunConfig,
        d_in_visual: usize,
        d_in_text: usize,
        rng: &mut ChaCha12Rng,
    ) -> Self {
        AlignmentParams {
            visual: Projection::init(d_in_visual, cfg.d, rng),
            semantic: Projection::init(d_in_text, cfg.d, rng),
            tau: cfg.tau,
            alpha: cfg.alpha,
            gamma: cfg.gamma,
            l2_normalize: cfg.l2_normalize,
        }
    }

    pub fn blocks(&self) -> [&[f64]; 4] {
        [
            self.visual.weight.data(),
            &self.visual.bias,
            self.semantic.weight.data(),
            &self.semantic.bias,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.visual.weight.data_mut(),
            &mut self.visual.bias,
            self.semantic.weight.data_mut(),
            &mut self.semantic.bias,
        ]
    }

    pub fn first_non_finite_block(&self) -> Option<&'static str> {
        self.blocks()
            .iter()
            .zip(PARAM_BLOCKS)
            .find(|(block, _)| block.iter().any(|v| !v.is_finite()))
            .map(|(_, name)| name)
    }
}

/// Raw (pre-projection) text features for an ordered set of classes: one
/// definition row per class and, optionally, one description-group matrix per
/// class. Groups arrive already cut to the configured top-k.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTextFeatures {
    pub class_ids: Vec<u32>,
    pub definitions: Mat,
    pub desc_groups: Option<Vec<Mat>>,
}

impl ClassTextFeatures {
    pub fn n_classes(&self) -> usize {
        self.class_ids.len()
    }
}

/// Gather the text features for `classes` (ascending id order) out of the
/// definition store and, when present, the description store. Description
/// rows keep store order; the first `k` per class are taken, fewer if fewer
/// exist. Classes with no description rows get an empty group — definition-
/// only training accepts that, content-based training reports it.
pub fn assemble_class_text(
    definitions: &FeatureStore,
    descriptions: Option<&FeatureStore>,
    classes: &BTreeSet<u32>,
    k: usize,
) -> Result<ClassTextFeatures, DataError> {
    let class_ids: Vec<u32> = classes.iter().copied().collect();
    let mut def_rows = Vec::with_capacity(class_ids.len());
    for &c in &class_ids {
        let rows = definitions.rows_for_class(c);
        match rows.as_slice() {
            [] => return Err(DataError::MissingClassRow { class_id: c }),
            [row] => def_rows.push(*row),
            _ => return Err(DataError::DuplicateClassRow { class_id: c }),
        }
    }
    let defs = definitions.features().gather_rows(&def_rows);

    let desc_groups = match descriptions {
        None => None,
        Some(store) => {
            let mut groups = Vec::with_capacity(class_ids.len());
            for &c in &class_ids {
                let mut rows = store.rows_for_class(c);
                rows.truncate(k);
                groups.push(store.features().gather_rows(&rows));
            }
            Some(groups)
        }
    };
    Ok(ClassTextFeatures { class_ids, definitions: defs, desc_groups })
}

/// Projected class semantics: definition features, content features, and
/// their alpha-weighted fusion. The unused side is absent at the endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassBank {
    pub class_ids: Vec<u32>,
    pub z_l: Option<Mat>,
    pub z_c: Option<Mat>,
    pub z: Mat,
}

/// Row-normalize in place; returns per-row norms. Zero rows stay untouched
/// and record a norm of 0, which the backward pass treats as identity.
pub(crate) fn l2_normalize_rows(m: &mut Mat) -> Vec<f64> {
    let mut norms = Vec::with_capacity(m.rows());
    for r in 0..m.rows() {
        let row = m.row_mut(r);
        let n = libm::sqrt(crate::matrix::dot(row, row));
        if n > 0.0 {
            for v in row.iter_mut() {
                *v /= n;
            }
        }
        norms.push(n);
    }
    norms
}

/// Backward of row normalization: dx = (dy − y·(y·dy)) / r per row.
pub(crate) fn l2_backward_rows(y: &Mat, norms: &[f64], dy: &Mat) -> Mat {
    let mut dx = dy.clone();
    for r in 0..y.rows() {
        if norms[r] == 0.0 {
            continue;
        }
        let yr = y.row(r);
        let proj = crate::matrix::dot(yr, dy.row(r));
        let out = dx.row_mut(r);
        for (o, &yv) in out.iter_mut().zip(yr) {
            *o = (*o - yv * proj) / norms[r];
        }
    }
    dx
}

/// Project video features into the shared space (with optional row
/// normalization). The entry point for both training and inference.
pub fn encode_visual(params: &AlignmentParams, raw: &Mat) -> Result<Mat, AlignError> {
    if raw.cols() != params.visual.d_in() {
        return Err(AlignError::DimMismatch {
            what: "visual input features",
            got: raw.cols(),
            want: params.visual.d_in(),
        });
    }
    let mut v = params.visual.apply(raw);
    if params.l2_normalize {
        l2_normalize_rows(&mut v);
    }
    if let Some((row, col)) = v.first_non_finite() {
        return Err(AlignError::NonFinite { site: "visual projection", row, col });
    }
    Ok(v)
}

/// alpha·z_l + (1−alpha)·z_c, with the absent side contributing nothing.
fn fuse(z_l: Option<&Mat>, z_c: Option<&Mat>, alpha: f64) -> Mat {
    match (z_l, z_c) {
        (Some(l), Some(c)) => {
            let mut z = Mat::zeros(l.rows(), l.cols());
            for ((zv, &lv), &cv) in z.data_mut().iter_mut().zip(l.data()).zip(c.data()) {
                *zv = alpha * lv + (1.0 - alpha) * cv;
            }
            z
        }
        (Some(l), None) => l.clone(),
        (None, Some(c)) => c.clone(),
        (None, None) => unreachable!("bank must carry at least one side"),
    }
}

/// Row norms recorded while building a bank with normalization on; the
/// objective's backward pass needs them.
#[derive(Debug, Clone, Default)]
pub(crate) struct BankExtras {
    pub z_l_norms: Option<Vec<f64>>,
    pub z_c_norms: Option<Vec<f64>>,
}

pub(crate) fn build_bank_inner(
    params: &AlignmentParams,
    text: &ClassTextFeatures,
) -> Result<(ClassBank, BankExtras), AlignError> {
    let c = text.n_classes();
    if c == 0 {
        return Err(AlignError::EmptyClassSet { which: "bank" });
    }
    if text.definitions.cols() != params.semantic.d_in() {
        return Err(AlignError::DimMismatch {
            what: "definition features",
            got: text.definitions.cols(),
            want: params.semantic.d_in(),
        });
    }
    let mut extras = BankExtras::default();

    let z_l = if params.alpha > 0.0 {
        let mut z = params.semantic.apply(&text.definitions);
        if params.l2_normalize {
            extras.z_l_norms = Some(l2_normalize_rows(&mut z));
        }
        if let Some((row, col)) = z.first_non_finite() {
            return Err(AlignError::NonFinite { site: "definition features", row, col });
        }
        Some(z)
    } else {
        None
    };

    let z_c = if params.alpha < 1.0 {
        let groups = text.desc_groups.as_ref().ok_or(AlignError::MissingDescriptions)?;
        let mut z = Mat::zeros(c, params.semantic.d_out());
        for (j, group) in groups.iter().enumerate() {
            if group.rows() == 0 {
                return Err(AlignError::NoDescriptions { class_index: j });
            }
            if group.cols() != params.semantic.d_in() {
                return Err(AlignError::DimMismatch {
                    what: "description features",
                    got: group.cols(),
                    want: params.semantic.d_in(),
                });
            }
            let projected = params.semantic.apply(group);
            let inv = 1.0 / group.rows() as f64;
            let sums = projected.col_sums();
            for (zv, &s) in z.row_mut(j).iter_mut().zip(&sums) {
                *zv = s * inv;
            }
        }
        if params.l2_normalize {
            extras.z_c_norms = Some(l2_normalize_rows(&mut z));
        }
        if let Some((row, col)) = z.first_non_finite() {
            return Err(AlignError::NonFinite { site: "content features", row, col });
        }
        Some(z)
    } else {
        None
    };

    let z = fuse(z_l.as_ref(), z_c.as_ref(), params.alpha);
    Ok((ClassBank { class_ids: text.class_ids.clone(), z_l, z_c, z }, extras))
}

/// Build the projected semantics bank for a class set under the current
/// parameters. Definition features are skipped entirely at alpha = 0 and
/// content features at alpha = 1, so the unused text source cannot leak into
/// any downstream value.
pub fn build_class_bank(
    params: &AlignmentParams,
    text: &ClassTextFeatures,
) -> Result<ClassBank, AlignError> {
    build_bank_inner(params, text).map(|(bank, _)| bank)
}
