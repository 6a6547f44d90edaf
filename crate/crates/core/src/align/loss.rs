//! Temperature-scaled contrastive loss between a batch of queries and a full
//! class bank, plus the softmax helpers every attention step shares.
//!
//! loss_i = −log softmax_j(q_i·k_j / tau)[y_i], with the normalizer running
//! over every class in the bank. Softmax subtracts the row max before
//! exponentiating; with a single class the loss is exactly zero, since the
//! row's log-sum-exp collapses to its only logit.


use super::AlignError;
use crate::matrix::Mat;
use crate::types::Reduction;

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &Mat) -> Mat {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        softmax_row_in_place(out.row_mut(r));
    }
    out
}

pub(crate) fn softmax_row_in_place(row: &mut [f64]) {
    let m = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = libm::exp(*v - m);
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Backward through one softmax row: dl = a ⊙ (da − (da·a)).
pub(crate) fn softmax_backward_row(a: &[f64], da: &[f64], dl: &mut [f64]) {
    let inner = crate::matrix::dot(da, a);
    for ((o, &av), &dav) in dl.iter_mut().zip(a).zip(da) {
        *o = av * (dav - inner);
    }
}

fn check(queries: &Mat, keys: &Mat, labels: &[usize]) -> Result<(), AlignError> {
    if queries.rows() == 0 {
        return Err(AlignError::EmptyBatch);
    }
    if keys.rows() == 0 {
        return Err(AlignError::EmptyClassSet { which: "contrastive key" });
    }
    if keys.cols() != queries.cols() {
        return Err(AlignError::DimMismatch {
            what: "contrastive keys",
            got: keys.cols(),
            want: queries.cols(),
        });
    }
    if labels.len() != queries.rows() {
        return Err(AlignError::DimMismatch {
            what: "labels",
            got: labels.len(),
            want: queries.rows(),
        });
    }
    for (index, &label) in labels.iter().enumerate() {
        if label >= keys.rows() {
            return Err(AlignError::BadLabel { index, label, classes: keys.rows() });
        }
    }
    Ok(())
}

/// Loss only, via log-sum-exp; the cheap path for finite differencing.
pub fn contrastive_loss_value(
    queries: &Mat,
    keys: &Mat,
    labels: &[usize],
    tau: f64,
    reduction: Reduction,
) -> Result<f64, AlignError> {
    check(queries, keys, labels)?;
    let logits = scaled_logits(queries, keys, tau);
    let mut total = 0.0;
    for i in 0..logits.rows() {
        let row = logits.row(i);
        let m = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let sum: f64 = row.iter().map(|&v| libm::exp(v - m)).sum();
        // lse − l_y, written so the label term never travels through m.
        total += libm::log(sum) - (row[labels[i]] - m);
    }
    Ok(reduce(total, queries.rows(), reduction))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastiveGrads {
    pub d_queries: Mat,
    pub d_keys: Mat,
}

/// Loss and exact gradients with respect to both sides.
pub fn contrastive_loss(
    queries: &Mat,
    keys: &Mat,
    labels: &[usize],
    tau: f64,
    reduction: Reduction,
) -> Result<(f64, ContrastiveGrads), AlignError> {
    check(queries, keys, labels)?;
    let n = queries.rows();
    let mut probs = scaled_logits(queries, keys, tau);

    let mut total = 0.0;
    for i in 0..n {
        let row = probs.row_mut(i);
        let m = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let shifted_label = row[labels[i]] - m;
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = libm::exp(*v - m);
            sum += *v;
        }
        // Same expression as the value-only path, so the two agree bitwise.
        total += libm::log(sum) - shifted_label;
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    let loss = reduce(total, n, reduction);

    // d(loss)/d(logit) = (p − onehot)·scale, then logits = Q·Kᵀ/tau.
    let scale = match reduction {
        Reduction::Mean => 1.0 / n as f64,
        Reduction::Sum => 1.0,
    } / tau;
    for (i, &label) in labels.iter().enumerate() {
        let row = probs.row_mut(i);
        row[label] -= 1.0;
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    let d_queries = probs.matmul(keys);
    let mut d_keys = Mat::zeros(keys.rows(), keys.cols());
    d_keys.acc_at_b(&probs, queries, 1.0);
    Ok((loss, ContrastiveGrads { d_queries, d_keys }))
}

fn scaled_logits(queries: &Mat, keys: &Mat, tau: f64) -> Mat {
    let mut logits = queries.matmul_bt(keys);
    logits.scale(1.0 / tau);
    logits
}

fn reduce(total: f64, n: usize, reduction: Reduction) -> f64 {
    match reduction {
        Reduction::Mean => total / n as f64,
        Reduction::Sum => total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn two_class_example_matches_closed_form() {
        // One query matching key 0 exactly, decoy at the origin, tau = 0.1:
        // logits are [10, 0], so the loss is log(1 + e^{-10}).
        let q = Mat::from_vec(1, 2, vec![1.0, 0.0]);
        let k = Mat::from_vec(2, 2, vec![1.0, 0.0, 0.0, 0.0]);
        let expected = libm::log(1.0 + libm::exp(-10.0));
        let got = contrastive_loss_value(&q, &k, &[0], 0.1, Reduction::Mean).unwrap();
        assert!((got - expected).abs() <= 1e-15, "{got} vs {expected}");
        assert!((got - 4.539889921686463e-5).abs() <= 1e-12);

        let (with_grads, _) = contrastive_loss(&q, &k, &[0], 0.1, Reduction::Mean).unwrap();
        assert_eq!(got, with_grads, "both paths must agree bitwise");
    }

    #[test]
    fn single_class_loss_is_exactly_zero() {
        let mut r = rng::stream(11, 0);
        let q = Mat::from_vec(4, 3, rng::uniform_vec(&mut r, 12, -2.0, 2.0));
        let k = Mat::from_vec(1, 3, rng::uniform_vec(&mut r, 3, -2.0, 2.0));
        let labels = [0usize; 4];
        let (loss, _) = contrastive_loss(&q, &k, &labels, 0.1, Reduction::Mean).unwrap();
        assert_eq!(loss, 0.0);
    }

    // Plain per-element reference: no shared subexpressions with the
    // production path beyond the formula itself.
    fn scalar_reference(q: &Mat, k: &Mat, labels: &[usize], tau: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..q.rows() {
            let mut logits = Vec::new();
            for j in 0..k.rows() {
                let mut dot = 0.0;
                for c in 0..q.cols() {
                    dot += q.get(i, c) * k.get(j, c);
                }
                logits.push(dot / tau);
            }
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + libm::log(logits.iter().map(|&l| libm::exp(l - m)).sum());
            total += lse - logits[labels[i]];
        }
        total / q.rows() as f64
    }

    #[test]
    fn matches_scalar_reference_on_random_instances() {
        let mut r = rng::stream(12, 0);
        for round in 0..50 {
            let n = 1 + round % 5;
            let c = 1 + (round / 5) % 6;
            let d = 2 + round % 4;
            let q = Mat::from_vec(n, d, rng::uniform_vec(&mut r, n * d, -1.5, 1.5));
            let k = Mat::from_vec(c, d, rng::uniform_vec(&mut r, c * d, -1.5, 1.5));
            let labels: Vec<usize> = (0..n).map(|i| i % c).collect();
            let got = contrastive_loss_value(&q, &k, &labels, 0.1, Reduction::Mean).unwrap();
            let want = scalar_reference(&q, &k, &labels, 0.1);
            assert!((got - want).abs() <= 1e-12, "round {round}: {got} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_shapes_and_labels() {
        let q = Mat::zeros(2, 3);
        let k = Mat::zeros(2, 3);
        assert_eq!(
            contrastive_loss_value(&q, &k, &[0, 2], 0.1, Reduction::Mean),
            Err(AlignError::BadLabel { index: 1, label: 2, classes: 2 })
        );
        assert_eq!(
            contrastive_loss_value(&Mat::zeros(0, 3), &k, &[], 0.1, Reduction::Mean),
            Err(AlignError::EmptyBatch)
        );
        assert!(matches!(
            contrastive_loss_value(&q, &Mat::zeros(2, 4), &[0, 1], 0.1, Reduction::Mean),
            Err(AlignError::DimMismatch { .. })
        ));
    }

    #[test]
    fn sum_reduction_is_n_times_mean() {
        let mut r = rng::stream(13, 0);
        let q = Mat::from_vec(3, 2, rng::uniform_vec(&mut r, 6, -1.0, 1.0));
        let k = Mat::from_vec(4, 2, rng::uniform_vec(&mut r, 8, -1.0, 1.0));
        let labels = [0, 1, 3];
        let mean = contrastive_loss_value(&q, &k, &labels, 0.2, Reduction::Mean).unwrap();
        let sum = contrastive_loss_value(&q, &k, &labels, 0.2, Reduction::Sum).unwrap();
        assert!((sum - 3.0 * mean).abs() <= 1e-12);
    }

    #[test]
    fn softmax_rows_sum_to_one_and_shift_invariance_holds() {
        let mut r = rng::stream(14, 0);
        let logits = Mat::from_vec(5, 7, rng::uniform_vec(&mut r, 35, -30.0, 30.0));
        let p = softmax_rows(&logits);
        for i in 0..5 {
            let s: f64 = p.row(i).iter().sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
        let mut shifted = logits.clone();
        for v in shifted.data_mut() {
            *v += 123.456;
        }
        let p2 = softmax_rows(&shifted);
        for (a, b) in p.data().iter().zip(p2.data()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}
