//! Zero-shot inference: score projected videos against a class bank.
//!
//! The score is the plain dot product between the projected video and the
//! fused class feature. Rankings sort scores descending; exact ties go to the
//! lower class index, so results never depend on sort internals.

use alloc::vec::Vec;

use super::{AlignError, ClassBank};
use crate::matrix::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    /// Per video: all bank row indices, best first.
    pub rankings: Vec<Vec<usize>>,
    /// Raw scores, one row per video, one column per bank row.
    pub scores: Mat,
}

impl Predictions {
    /// Best class per video (bank row indices).
    pub fn top1(&self) -> Vec<usize> {
        self.rankings.iter().map(|r| r[0]).collect()
    }
}

/// `videos` must already be projected into the shared space (see
/// `encode_visual`); the bank supplies fused class features.
pub fn predict(videos: &Mat, bank: &ClassBank) -> Result<Predictions, AlignError> {
    if bank.z.rows() == 0 {
        return Err(AlignError::EmptyClassSet { which: "prediction" });
    }
    if videos.cols() != bank.z.cols() {
        return Err(AlignError::DimMismatch {
            what: "projected videos",
            got: videos.cols(),
            want: bank.z.cols(),
        });
    }
    let scores = videos.matmul_bt(&bank.z);
    let mut rankings = Vec::with_capacity(videos.rows());
    for i in 0..videos.rows() {
        let row = scores.row(i);
        let mut order: Vec<usize> = (0..row.len()).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        rankings.push(order);
    }
    Ok(Predictions { rankings, scores })
}
