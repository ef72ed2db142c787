//! Small dense/banded helpers not covered by nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Symmetric positive definite band matrix stored by lower diagonals,
/// factorised in place as `L L^T`.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    // band[i * (bw + 1) + k] = A[i][i - k]
    band: Vec<f64>,
}

impl BandCholesky {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, band: vec![0.0; n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Adds `value` to `A[i][j]` for `j <= i`; entries above the diagonal are ignored.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        if j > i {
            return;
        }
        let k = i - j;
        assert!(k <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        self.band[i * (self.bw + 1) + k] += value;
    }

    fn at(&self, i: usize, k: usize) -> f64 {
        self.band[i * (self.bw + 1) + k]
    }

    pub fn factorize(mut self) -> Result<Self> {
        let w = self.bw + 1;
        let scale = (0..self.n).map(|i| self.at(i, 0).abs()).fold(0.0, f64::max);
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bw);
            for j in j0..=i {
                let mut sum = self.band[i * w + (i - j)];
                let k0 = j0.max(j.saturating_sub(self.bw));
                for k in k0..j {
                    sum -= self.band[i * w + (i - k)] * self.band[j * w + (j - k)];
                }
                if j == i {
                    if !(sum > 1e-13 * scale) {
                        return Err(Error::numerical(format!(
                            "stiffness matrix is singular or indefinite at equation {i}"
                        )));
                    }
                    self.band[i * w] = sum.sqrt();
                } else {
                    self.band[i * w + (i - j)] = sum / self.band[j * w];
                }
            }
        }
        Ok(self)
    }

    /// Solves `A x = b` with a factorised matrix.
    pub fn solve(&self, rhs: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let mut sum = rhs[i];
            for k in i.saturating_sub(self.bw)..i {
                sum -= self.band[i * w + (i - k)] * rhs[k];
            }
            rhs[i] = sum / self.band[i * w];
        }
        for i in (0..self.n).rev() {
            let mut sum = rhs[i];
            for k in (i + 1)..(i + 1 + self.bw).min(self.n) {
                sum -= self.band[k * w + (k - i)] * rhs[k];
            }
            rhs[i] = sum / self.band[i * w];
        }
    }
}

/// Solves the lower-triangular system `L x = b` column-by-column.
pub fn lower_solve(l: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    l.solve_lower_triangular(b).expect("non-singular triangular factor")
}

pub fn lower_solve_vec(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    l.solve_lower_triangular(b).expect("non-singular triangular factor")
}

/// Ratio of the extreme singular values, `inf` for rank-deficient input.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Number of multi-indices of total degree `<= p` in `d` variables, `C(p+d, d)`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All multi-indices in `d` variables with total degree `<= p`, graded
/// lexicographic order: by total degree, then lexicographically descending
/// in the leading variable (`x1` before `x2` before ...).
pub fn graded_multi_indices(d: usize, p: usize) -> Vec<Vec<usize>> {
    fn fill(rest: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = rest;
            out.push(cur.clone());
            return;
        }
        for k in (0..=rest).rev() {
            cur[pos] = k;
            fill(rest - k, pos + 1, cur, out);
        }
    }
    let mut out = Vec::with_capacity(binomial(p + d, d));
    let mut cur = vec![0; d];
    for total in 0..=p {
        fill(total, 0, &mut cur, &mut out);
    }
    out
}
