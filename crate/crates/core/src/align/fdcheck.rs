//! Central finite-difference verification of the analytic gradients.
//!
//! Perturbs every parameter entry by ±h, re-evaluates the full objective, and
//! compares the centered difference against the backward pass. Deliberately
//! knows nothing about how the gradients are computed — it only calls the
//! value-path forward — so it stays an independent check.

use super::objective::{overall_loss, overall_loss_value, Batch};
use super::{AlignError, AlignmentParams, ClassTextFeatures, PARAM_BLOCKS};
use crate::types::Reduction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    /// Worst relative error per parameter block, ordered as `PARAM_BLOCKS`.
    pub per_block: [f64; 4],
    pub max: f64,
}

impl FdReport {
    pub fn block_names() -> [&'static str; 4] {
        PARAM_BLOCKS
    }
}

/// Relative error with a unit floor: |a−n| / max(1, |a|, |n|). Below unit
/// magnitude this is an absolute comparison, which keeps the check meaningful
/// where the true gradient is near zero and the centered difference is
/// dominated by cancellation noise.
fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

pub fn finite_difference_check(
    params: &AlignmentParams,
    batch: &Batch,
    seen_text: &ClassTextFeatures,
    cycle_text: Option<&ClassTextFeatures>,
    reduction: Reduction,
    h: f64,
) -> Result<FdReport, AlignError> {
    let (_, grads) = overall_loss(params, batch, seen_text, cycle_text, reduction)?;
    let mut probe = params.clone();
    let mut per_block = [0.0f64; 4];

    for block in 0..4 {
        let len = probe.blocks()[block].len();
        for idx in 0..len {
            let orig = probe.blocks()[block][idx];
            probe.blocks_mut()[block][idx] = orig + h;
            let up = overall_loss_value(&probe, batch, seen_text, cycle_text, reduction)?.total;
            probe.blocks_mut()[block][idx] = orig - h;
            let down = overall_loss_value(&probe, batch, seen_text, cycle_text, reduction)?.total;
            probe.blocks_mut()[block][idx] = orig;

            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.blocks()[block][idx];
            let e = rel_err(analytic, numeric);
            if e > per_block[block] {
                per_block[block] = e;
            }
        }
    }
    let max = per_block.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(FdReport { per_block, max })
}
