//! Dense row-major matrices over f64.
//!
//! Deliberately minimal: just the operations the model needs, each with a
//! fixed left-to-right accumulation order so results are bitwise reproducible
//! across runs. Shape mismatches are programmer errors and panic; fallible
//! validation happens at the public API boundary before any math runs.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// New matrix from a subset of rows, in the order given.
    pub fn gather_rows(&self, idx: &[usize]) -> Mat {
        let mut out = Mat::zeros(idx.len(), self.cols);
        for (i, &r) in idx.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(r));
        }
        out
    }

    /// self · other, (n×k)·(k×m) → n×m.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul inner dimensions must agree");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = out.row_mut(i);
            for (l, &al) in a.iter().enumerate() {
                let b = other.row(l);
                for (oj, &bj) in o.iter_mut().zip(b) {
                    *oj += al * bj;
                }
            }
        }
        out
    }

    /// self · otherᵀ, (n×d)·(m×d)ᵀ → n×m. Pairwise row dot products.
    pub fn matmul_bt(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols, "matmul_bt column counts must agree");
        let mut out = Mat::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                out.set(i, j, dot(a, other.row(j)));
            }
        }
        out
    }

    /// self += s · aᵀ·b, where a is n×r and b is n×c. The transpose-times
    /// form every affine-map weight gradient takes.
    pub fn acc_at_b(&mut self, a: &Mat, b: &Mat, s: f64) {
        assert_eq!(a.rows, b.rows, "acc_at_b row counts must agree");
        assert_eq!(self.rows, a.cols, "acc_at_b output rows must equal a.cols");
        assert_eq!(self.cols, b.cols, "acc_at_b output cols must equal b.cols");
        for n in 0..a.rows {
            let ar = a.row(n);
            let br = b.row(n);
            for (r, &av) in ar.iter().enumerate() {
                let out = self.row_mut(r);
                for (o, &bv) in out.iter_mut().zip(br) {
                    *o += s * av * bv;
                }
            }
        }
    }

    /// self += s · uᵀv for row vectors u (len = rows) and v (len = cols).
    pub fn acc_outer(&mut self, u: &[f64], v: &[f64], s: f64) {
        assert_eq!(u.len(), self.rows, "acc_outer u length must equal rows");
        assert_eq!(v.len(), self.cols, "acc_outer v length must equal cols");
        for (r, &uv) in u.iter().enumerate() {
            let out = self.row_mut(r);
            for (o, &vv) in out.iter_mut().zip(v) {
                *o += s * uv * vv;
            }
        }
    }

    /// self += s · other, elementwise.
    pub fn acc(&mut self, other: &Mat, s: f64) {
        assert_eq!(self.rows, other.rows, "acc shapes must agree");
        assert_eq!(self.cols, other.cols, "acc shapes must agree");
        for (o, &v) in self.data.iter_mut().zip(&other.data) {
            *o += s * v;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Add v to every row.
    pub fn add_row_vec(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.cols, "bias length must equal cols");
        for r in 0..self.rows {
            for (o, &b) in self.row_mut(r).iter_mut().zip(v) {
                *o += b;
            }
        }
    }

    /// Column sums, accumulated top to bottom.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (o, &v) in out.iter_mut().zip(self.row(r)) {
                *o += v;
            }
        }
        out
    }

    /// Index of the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|p| (p / self.cols, p % self.cols))
    }

    /// Frobenius norm; used only for diagnostics.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_mat(rng: &mut ChaCha12Rng, rows: usize, cols: usize) -> Mat {
        Mat::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect())
    }

    // Scalar triple loops, independent of the production accumulation order.
    fn naive_matmul(a: &Mat, b: &Mat) -> Mat {
        let mut out = Mat::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for l in 0..a.cols() {
                    s += a.get(i, l) * b.get(l, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    #[test]
    fn matmul_matches_naive() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (n, k, m) = (rng.gen_range(1..6), rng.gen_range(1..6), rng.gen_range(1..6));
            let a = random_mat(&mut rng, n, k);
            let b = random_mat(&mut rng, k, m);
            let got = a.matmul(&b);
            let want = naive_matmul(&a, &b);
            for (g, w) in got.data().iter().zip(want.data()) {
                assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
            }
        }
    }

    #[test]
    fn matmul_bt_is_pairwise_dots() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let a = random_mat(&mut rng, 4, 7);
        let b = random_mat(&mut rng, 3, 7);
        let got = a.matmul_bt(&b);
        for i in 0..4 {
            for j in 0..3 {
                let want: f64 = (0..7).map(|l| a.get(i, l) * b.get(j, l)).sum();
                assert!((got.get(i, j) - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn acc_at_b_matches_explicit_transpose() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let a = random_mat(&mut rng, 5, 3);
        let b = random_mat(&mut rng, 5, 4);
        let mut got = Mat::zeros(3, 4);
        got.acc_at_b(&a, &b, 1.5);
        for r in 0..3 {
            for c in 0..4 {
                let want: f64 = (0..5).map(|n| 1.5 * a.get(n, r) * b.get(n, c)).sum();
                assert!((got.get(r, c) - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn gather_and_col_sums() {
        let m = Mat::from_vec(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let g = m.gather_rows(&[2, 0]);
        assert_eq!(g.data(), &[5.0, 6.0, 1.0, 2.0]);
        assert_eq!(m.col_sums(), vec![9.0, 12.0]);
    }

    #[test]
    fn non_finite_location() {
        let mut m = Mat::zeros(2, 3);
        assert_eq!(m.first_non_finite(), None);
        m.set(1, 2, f64::NAN);
        assert_eq!(m.first_non_finite(), Some((1, 2)));
    }
}
