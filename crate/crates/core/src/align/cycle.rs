//! Cycle reconstruction of seen-class semantics through the unseen bank.
//!
//! Each seen feature attends over the unseen bank (forward hop), and the
//! resulting mixtures attend back over the seen bank (backward hop), yielding
//! a reconstruction of every seen feature out of unseen-class material. Both
//! hops share the model's temperature. Gradients flow through the attention
//! weights on both hops — the cycle is trained end to end, not treated as a
//! constant target.

use super::loss::{softmax_backward_row, softmax_rows};
use super::AlignError;
use crate::matrix::Mat;

/// Forward results, with the attention maps kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleFeatures {
    /// Forward-hop attention, one row per seen class over unseen classes.
    pub attn_forward: Mat,
    /// Unseen mixtures: attn_forward · z_unseen.
    pub forward: Mat,
    /// Backward-hop attention, rows over seen classes.
    pub attn_backward: Mat,
    /// Cycle-reconstructed seen features: attn_backward · z_seen.
    pub reconstructed: Mat,
}

pub fn cycle_reconstruct(
    z_seen: &Mat,
    z_unseen: &Mat,
    tau: f64,
) -> Result<CycleFeatures, AlignError> {
    if z_seen.rows() == 0 {
        return Err(AlignError::EmptyClassSet { which: "seen" });
    }
    if z_unseen.rows() == 0 {
        return Err(AlignError::EmptyClassSet { which: "cycle" });
    }
    if z_unseen.cols() != z_seen.cols() {
        return Err(AlignError::DimMismatch {
            what: "cycle bank features",
            got: z_unseen.cols(),
            want: z_seen.cols(),
        });
    }

    let mut fwd_logits = z_seen.matmul_bt(z_unseen);
    fwd_logits.scale(1.0 / tau);
    let attn_forward = softmax_rows(&fwd_logits);
    let forward = attn_forward.matmul(z_unseen);

    let mut bwd_logits = forward.matmul_bt(z_seen);
    bwd_logits.scale(1.0 / tau);
    let attn_backward = softmax_rows(&bwd_logits);
    let reconstructed = attn_backward.matmul(z_seen);

    for (site, m) in [("cycle forward hop", &forward), ("cycle reconstruction", &reconstructed)] {
        if let Some((row, col)) = m.first_non_finite() {
            return Err(AlignError::NonFinite { site, row, col });
        }
    }
    Ok(CycleFeatures { attn_forward, forward, attn_backward, reconstructed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleGrads {
    pub d_seen: Mat,
    pub d_unseen: Mat,
}

/// Backpropagate `d_reconstructed` through both hops, accumulating into
/// gradients for the two banks. `feats` must come from `cycle_reconstruct`
/// on the same inputs.
pub fn cycle_backward(
    feats: &CycleFeatures,
    z_seen: &Mat,
    z_unseen: &Mat,
    tau: f64,
    d_reconstructed: &Mat,
) -> CycleGrads {
    let n = z_seen.rows();
    let d = z_seen.cols();
    let mut d_seen = Mat::zeros(n, d);
    let mut d_unseen = Mat::zeros(z_unseen.rows(), d);

    // reconstructed = attn_backward · z_seen
    d_seen.acc_at_b(&feats.attn_backward, d_reconstructed, 1.0);
    let d_attn_b = d_reconstructed.matmul_bt(z_seen);

    // attn_backward = softmax(forward · z_seenᵀ / tau), row-wise
    let mut d_logits_b = Mat::zeros(n, n);
    for i in 0..n {
        softmax_backward_row(
            feats.attn_backward.row(i),
            d_attn_b.row(i),
            d_logits_b.row_mut(i),
        );
    }
    d_logits_b.scale(1.0 / tau);
    let d_forward = d_logits_b.matmul(z_seen);
    d_seen.acc_at_b(&d_logits_b, &feats.forward, 1.0);

    // forward = attn_forward · z_unseen
    d_unseen.acc_at_b(&feats.attn_forward, &d_forward, 1.0);
    let d_attn_f = d_forward.matmul_bt(z_unseen);

    // attn_forward = softmax(z_seen · z_unseenᵀ / tau), row-wise
    let mut d_logits_f = Mat::zeros(n, z_unseen.rows());
    for i in 0..n {
        softmax_backward_row(
            feats.attn_forward.row(i),
            d_attn_f.row(i),
            d_logits_f.row_mut(i),
        );
    }
    d_logits_f.scale(1.0 / tau);
    d_seen.acc(&d_logits_f.matmul(z_unseen), 1.0);
    d_unseen.acc_at_b(&d_logits_f, z_seen, 1.0);

    CycleGrads { d_seen, d_unseen }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use alloc::vec;

    fn banks(n: usize, m: usize, d: usize, seed: u64) -> (Mat, Mat) {
        let mut r = rng::stream(seed, 0);
        let s = Mat::from_vec(n, d, rng::uniform_vec(&mut r, n * d, -1.0, 1.0));
        let u = Mat::from_vec(m, d, rng::uniform_vec(&mut r, m * d, -1.0, 1.0));
        (s, u)
    }

    #[test]
    fn attention_rows_are_distributions() {
        let (s, u) = banks(5, 3, 4, 21);
        let f = cycle_reconstruct(&s, &u, 0.1).unwrap();
        for i in 0..5 {
            let sf: f64 = f.attn_forward.row(i).iter().sum();
            let sb: f64 = f.attn_backward.row(i).iter().sum();
            assert!((sf - 1.0).abs() <= 1e-12);
            assert!((sb - 1.0).abs() <= 1e-12);
            assert!(f.attn_forward.row(i).iter().all(|&p| p >= 0.0));
        }
        assert_eq!(f.forward.rows(), 5);
        assert_eq!(f.reconstructed.rows(), 5);
    }

    #[test]
    fn tiny_temperature_snaps_to_nearest_neighbor() {
        let (s, u) = banks(4, 3, 4, 22);
        let f = cycle_reconstruct(&s, &u, 1e-6).unwrap();
        for i in 0..4 {
            let row = f.attn_forward.row(i);
            let argmax = (0..3).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            for (j, &p) in row.iter().enumerate() {
                let want = if j == argmax { 1.0 } else { 0.0 };
                assert!((p - want).abs() <= 1e-9, "row {i} col {j}: {p}");
            }
        }
    }

    #[test]
    fn two_by_two_sigmoid_example() {
        // Identical symmetric banks: each forward row's logits are [1/tau, 0],
        // so attention on the matching class is 1/(1 + e^{-10}) at tau = 0.1.
        let s = Mat::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let u = s.clone();
        let f = cycle_reconstruct(&s, &u, 0.1).unwrap();
        let sigma = 1.0 / (1.0 + libm::exp(-10.0));
        assert!((f.attn_forward.get(0, 0) - sigma).abs() <= 1e-15);
        assert!((f.attn_forward.get(1, 1) - sigma).abs() <= 1e-15);
        assert!((sigma - 0.9999546021312976).abs() <= 1e-12);
    }

    // Central finite differences through the full cycle on a scalar probe
    // sum(reconstructed ⊙ G), which exercises every gradient path.
    #[test]
    fn backward_matches_finite_differences() {
        let (s, u) = banks(3, 4, 3, 23);
        let mut r = rng::stream(23, 9);
        let g = Mat::from_vec(3, 3, rng::uniform_vec(&mut r, 9, -1.0, 1.0));
        let probe = |zs: &Mat, zu: &Mat| -> f64 {
            let f = cycle_reconstruct(zs, zu, 0.25).unwrap();
            f.reconstructed.data().iter().zip(g.data()).map(|(a, b)| a * b).sum()
        };

        let f = cycle_reconstruct(&s, &u, 0.25).unwrap();
        let grads = cycle_backward(&f, &s, &u, 0.25, &g);

        let h = 1e-6;
        for (mat, grad, name) in [(&s, &grads.d_seen, "seen"), (&u, &grads.d_unseen, "unseen")] {
            for idx in 0..mat.data().len() {
                let mut hi = mat.clone();
                hi.data_mut()[idx] += h;
                let mut lo = mat.clone();
                lo.data_mut()[idx] -= h;
                let num = if name == "seen" {
                    (probe(&hi, &u) - probe(&lo, &u)) / (2.0 * h)
                } else {
                    (probe(&s, &hi) - probe(&s, &lo)) / (2.0 * h)
                };
                let ana = grad.data()[idx];
                assert!(
                    (num - ana).abs() <= 1e-6 * ana.abs().max(num.abs()).max(1.0),
                    "{name}[{idx}]: analytic {ana} vs numeric {num}"
                );
            }
        }
    }
}
