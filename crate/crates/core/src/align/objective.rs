//! The training objective: both alignment terms plus the weighted cycle
//! term, with exact gradients for all four parameter blocks.
//!
//! total = [alpha>0]·L_def + [alpha<1]·L_con + gamma·L_cyc
//!
//! Every class feature is rebuilt from the current parameters on every call —
//! the semantic encoder is a single affine map, so recomputing is as cheap as
//! any caching scheme and gradients stay exact. The value-only entry point
//! runs the identical forward arithmetic, which finite differencing and the
//! bitwise ablation guarantees both rely on.

use alloc::vec;
use alloc::vec::Vec;

use super::cycle::{cycle_backward, cycle_reconstruct};
use super::loss::{contrastive_loss, contrastive_loss_value};
use super::{
    build_bank_inner, l2_backward_rows, AlignError, AlignmentParams, ClassBank, ClassTextFeatures,
};
use crate::matrix::Mat;
use crate::types::Reduction;

#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub videos_raw: &'a Mat,
    /// Row indices into the seen bank, one per video.
    pub labels: &'a [usize],
}

/// Raw loss terms; absent terms are zero. The cycle term is stored
/// unweighted — `total` is where gamma applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub definition: f64,
    pub content: f64,
    pub cycle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub visual_weight: Mat,
    pub visual_bias: Vec<f64>,
    pub semantic_weight: Mat,
    pub semantic_bias: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros_like(params: &AlignmentParams) -> Self {
        ParamGrads {
            visual_weight: Mat::zeros(params.visual.d_in(), params.visual.d_out()),
            visual_bias: vec![0.0; params.visual.d_out()],
            semantic_weight: Mat::zeros(params.semantic.d_in(), params.semantic.d_out()),
            semantic_bias: vec![0.0; params.semantic.d_out()],
        }
    }

    /// Same order as `AlignmentParams::blocks`.
    pub fn blocks(&self) -> [&[f64]; 4] {
        [
            self.visual_weight.data(),
            &self.visual_bias,
            self.semantic_weight.data(),
            &self.semantic_bias,
        ]
    }
}

fn validate_batch(
    params: &AlignmentParams,
    batch: &Batch,
    seen_text: &ClassTextFeatures,
) -> Result<(), AlignError> {
    if batch.videos_raw.rows() == 0 {
        return Err(AlignError::EmptyBatch);
    }
    if batch.videos_raw.cols() != params.visual.d_in() {
        return Err(AlignError::DimMismatch {
            what: "visual input features",
            got: batch.videos_raw.cols(),
            want: params.visual.d_in(),
        });
    }
    if batch.labels.len() != batch.videos_raw.rows() {
        return Err(AlignError::DimMismatch {
            what: "labels",
            got: batch.labels.len(),
            want: batch.videos_raw.rows(),
        });
    }
    let c = seen_text.n_classes();
    for (index, &label) in batch.labels.iter().enumerate() {
        if label >= c {
            return Err(AlignError::BadLabel { index, label, classes: c });
        }
    }
    Ok(())
}

fn project_videos(
    params: &AlignmentParams,
    raw: &Mat,
) -> Result<(Mat, Option<Vec<f64>>), AlignError> {
    let mut v = params.visual.apply(raw);
    let norms = params.l2_normalize.then(|| super::l2_normalize_rows(&mut v));
    if let Some((row, col)) = v.first_non_finite() {
        return Err(AlignError::NonFinite { site: "visual projection", row, col });
    }
    Ok((v, norms))
}

/// Forward pass only. Identical arithmetic to `overall_loss` — both build
/// the same banks and reduce the same terms in the same order.
pub fn overall_loss_value(
    params: &AlignmentParams,
    batch: &Batch,
    seen_text: &ClassTextFeatures,
    cycle_text: Option<&ClassTextFeatures>,
    reduction: Reduction,
) -> Result<LossBreakdown, AlignError> {
    validate_batch(params, batch, seen_text)?;
    let (v, _) = project_videos(params, batch.videos_raw)?;
    let (bank, _) = build_bank_inner(params, seen_text)?;

    let mut out = LossBreakdown { total: 0.0, definition: 0.0, content: 0.0, cycle: 0.0 };
    if let Some(z_l) = &bank.z_l {
        out.definition = contrastive_loss_value(&v, z_l, batch.labels, params.tau, reduction)?;
        out.total += out.definition;
    }
    if let Some(z_c) = &bank.z_c {
        out.content = contrastive_loss_value(&v, z_c, batch.labels, params.tau, reduction)?;
        out.total += out.content;
    }
    if params.gamma > 0.0 {
        let cycle_text = cycle_text.ok_or(AlignError::MissingCycleBank)?;
        let (cycle_bank, _) = build_bank_inner(params, cycle_text)?;
        let feats = cycle_reconstruct(&bank.z, &cycle_bank.z, params.tau)?;
        out.cycle =
            contrastive_loss_value(&v, &feats.reconstructed, batch.labels, params.tau, reduction)?;
        out.total += params.gamma * out.cycle;
    }
    if !out.total.is_finite() {
        return Err(AlignError::NonFinite { site: "total loss", row: 0, col: 0 });
    }
    Ok(out)
}

/// Split a gradient on a fused bank back onto its definition/content parts.
fn split_fused_grad(
    bank: &ClassBank,
    alpha: f64,
    d_fused: &Mat,
    d_zl: &mut Option<Mat>,
    d_zc: &mut Option<Mat>,
) {
    if bank.z_l.is_some() {
        let target = d_zl.get_or_insert_with(|| Mat::zeros(d_fused.rows(), d_fused.cols()));
        target.acc(d_fused, if bank.z_c.is_some() { alpha } else { 1.0 });
    }
    if bank.z_c.is_some() {
        let target = d_zc.get_or_insert_with(|| Mat::zeros(d_fused.rows(), d_fused.cols()));
        target.acc(d_fused, if bank.z_l.is_some() { 1.0 - alpha } else { 1.0 });
    }
}

/// Accumulate semantic-projection gradients for one bank given gradients on
/// its (normalized) definition and content features.
#[allow(clippy::too_many_arguments)]
fn backprop_bank(
    text: &ClassTextFeatures,
    bank: &ClassBank,
    z_l_norms: &Option<Vec<f64>>,
    z_c_norms: &Option<Vec<f64>>,
    d_zl: Option<Mat>,
    d_zc: Option<Mat>,
    grads: &mut ParamGrads,
) {
    if let Some(d_zl) = d_zl {
        let z_l = bank.z_l.as_ref().expect("gradient for an absent definition bank");
        let d_pre = match z_l_norms {
            Some(norms) => l2_backward_rows(z_l, norms, &d_zl),
            None => d_zl,
        };
        grads.semantic_weight.acc_at_b(&text.definitions, &d_pre, 1.0);
        for (b, &v) in grads.semantic_bias.iter_mut().zip(&d_pre.col_sums()) {
            *b += v;
        }
    }
    if let Some(d_zc) = d_zc {
        let z_c = bank.z_c.as_ref().expect("gradient for an absent content bank");
        let d_pre = match z_c_norms {
            Some(norms) => l2_backward_rows(z_c, norms, &d_zc),
            None => d_zc,
        };
        let groups = text.desc_groups.as_ref().expect("content grad without groups");
        for (j, group) in groups.iter().enumerate() {
            // z_c[j] = mean of projected rows, so each description row
            // contributes 1/k of the mean's gradient; summed over the group
            // that is colsum(group)/k against d_mean[j].
            let inv_k = 1.0 / group.rows() as f64;
            let mut rowsum = group.col_sums();
            for v in &mut rowsum {
                *v *= inv_k;
            }
            grads.semantic_weight.acc_outer(&rowsum, d_pre.row(j), 1.0);
            for (b, &v) in grads.semantic_bias.iter_mut().zip(d_pre.row(j)) {
                *b += v;
            }
        }
    }
}

/// Forward and backward in one pass.
pub fn overall_loss(
    params: &AlignmentParams,
    batch: &Batch,
    seen_text: &ClassTextFeatures,
    cycle_text: Option<&ClassTextFeatures>,
    reduction: Reduction,
) -> Result<(LossBreakdown, ParamGrads), AlignError> {
    validate_batch(params, batch, seen_text)?;
    let (v, v_norms) = project_videos(params, batch.videos_raw)?;
    let (bank, bank_extras) = build_bank_inner(params, seen_text)?;

    let mut out = LossBreakdown { total: 0.0, definition: 0.0, content: 0.0, cycle: 0.0 };
    let mut grads = ParamGrads::zeros_like(params);
    let mut d_v = Mat::zeros(v.rows(), v.cols());
    let mut d_zl: Option<Mat> = None;
    let mut d_zc: Option<Mat> = None;

    if let Some(z_l) = &bank.z_l {
        let (loss, g) = contrastive_loss(&v, z_l, batch.labels, params.tau, reduction)?;
        out.definition = loss;
        out.total += loss;
        d_v.acc(&g.d_queries, 1.0);
        d_zl.get_or_insert_with(|| Mat::zeros(z_l.rows(), z_l.cols())).acc(&g.d_keys, 1.0);
    }
    if let Some(z_c) = &bank.z_c {
        let (loss, g) = contrastive_loss(&v, z_c, batch.labels, params.tau, reduction)?;
        out.content = loss;
        out.total += loss;
        d_v.acc(&g.d_queries, 1.0);
        d_zc.get_or_insert_with(|| Mat::zeros(z_c.rows(), z_c.cols())).acc(&g.d_keys, 1.0);
    }

    let mut cycle_parts = None;
    if params.gamma > 0.0 {
        let cycle_text = cycle_text.ok_or(AlignError::MissingCycleBank)?;
        let (cycle_bank, cycle_extras) = build_bank_inner(params, cycle_text)?;
        let feats = cycle_reconstruct(&bank.z, &cycle_bank.z, params.tau)?;
        let (loss, g) =
            contrastive_loss(&v, &feats.reconstructed, batch.labels, params.tau, reduction)?;
        out.cycle = loss;
        out.total += params.gamma * loss;
        d_v.acc(&g.d_queries, params.gamma);

        let mut d_rec = g.d_keys;
        d_rec.scale(params.gamma);
        let cg = cycle_backward(&feats, &bank.z, &cycle_bank.z, params.tau, &d_rec);
        split_fused_grad(&bank, params.alpha, &cg.d_seen, &mut d_zl, &mut d_zc);

        let mut d_zl_u: Option<Mat> = None;
        let mut d_zc_u: Option<Mat> = None;
        split_fused_grad(&cycle_bank, params.alpha, &cg.d_unseen, &mut d_zl_u, &mut d_zc_u);
        cycle_parts = Some((cycle_bank, cycle_extras, d_zl_u, d_zc_u));
    }
    if !out.total.is_finite() {
        return Err(AlignError::NonFinite { site: "total loss", row: 0, col: 0 });
    }

    // Projection backward: visual, then seen semantics, then cycle semantics.
    let d_v_pre = match &v_norms {
        Some(norms) => l2_backward_rows(&v, norms, &d_v),
        None => d_v,
    };
    grads.visual_weight.acc_at_b(batch.videos_raw, &d_v_pre, 1.0);
    for (b, &g) in grads.visual_bias.iter_mut().zip(&d_v_pre.col_sums()) {
        *b += g;
    }

    backprop_bank(
        seen_text,
        &bank,
        &bank_extras.z_l_norms,
        &bank_extras.z_c_norms,
        d_zl,
        d_zc,
        &mut grads,
    );
    if let Some((cycle_bank, cycle_extras, d_zl_u, d_zc_u)) = cycle_parts {
        backprop_bank(
            cycle_text.expect("checked above"),
            &cycle_bank,
            &cycle_extras.z_l_norms,
            &cycle_extras.z_c_norms,
            d_zl_u,
            d_zc_u,
            &mut grads,
        );
    }
    Ok((out, grads))
}
