//! Small dense matrix helpers.
//!
//! Every matrix in this crate is tiny (at most (p+1) x (p+1) with p around
//! 2..6), so a plain row-major `Vec<f64>` with explicit Gaussian elimination
//! is all that is needed. No BLAS, no iterative solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Matrix-matrix product.
    pub fn mul_mat(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    /// Maximum absolute row sum (induced infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    /// Returns `None` when a pivot vanishes (exactly singular).
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .unwrap();
            if a[(pivot_row, col)].abs() < f64::MIN_POSITIVE * 4.0 {
                return None;
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                inv.swap_rows(pivot_row, col);
            }
            let pivot = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= pivot;
                inv[(col, j)] /= pivot;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let factor = a[(i, col)];
                if factor == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let d = factor * a[(col, j)];
                    a[(i, j)] -= d;
                    let d = factor * inv[(col, j)];
                    inv[(i, j)] -= d;
                }
            }
        }
        Some(inv)
    }

    /// Infinity-norm condition number, computed from the explicit inverse.
    pub fn condition_inf(&self) -> f64 {
        match self.inverse() {
            Some(inv) => self.norm_inf() * inv.norm_inf(),
            None => f64::INFINITY,
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solve `G * X^T = B^T` for `X` given symmetric `G` and the stacked
/// right-hand-side rows `B` (each row of `B` yields a row of `X`), i.e.
/// compute `B * G^{-1}` with a condition-number guard.
///
/// This is the shape of every CLS/WCLS normal-equation solve: the Gram matrix
/// is (p+1) x (p+1) and `B` holds p rows of cross-moment sums.
pub fn solve_normal_equations(gram: &Matrix, rhs_rows: &Matrix, cond_limit: f64) -> Result<Matrix> {
    let inv = gram.inverse().ok_or(Error::SingularGram { condition: f64::INFINITY })?;
    let condition = gram.norm_inf() * inv.norm_inf();
    if !condition.is_finite() || condition > cond_limit {
        return Err(Error::SingularGram { condition });
    }
    Ok(solve_refined(rhs_rows, gram, &inv))
}

/// `B * G^{-1}` with one step of iterative refinement, which keeps the
/// normal-equation residual `B - X G` near machine precision even when the
/// Gram is poorly conditioned.
pub fn solve_refined(rhs_rows: &Matrix, gram: &Matrix, gram_inv: &Matrix) -> Matrix {
    let mut x = rhs_rows.mul_mat(gram_inv);
    let defect = rhs_rows.sub(&x.mul_mat(gram));
    let correction = defect.mul_mat(gram_inv);
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            x[(i, j)] += correction[(i, j)];
        }
    }
    x
}

/// Dot product of two slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm of a slice.
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_of_known_2x2() {
        // Gram [[5,3],[3,2]] has determinant 1 and inverse [[2,-3],[-3,5]].
        let g = Matrix::from_rows(&[vec![5.0, 3.0], vec![3.0, 2.0]]);
        let inv = g.inverse().unwrap();
        assert_relative_eq!(inv[(0, 0)], 2.0, epsilon = 1e-12);
        assert_relative_eq!(inv[(0, 1)], -3.0, epsilon = 1e-12);
        assert_relative_eq!(inv[(1, 0)], -3.0, epsilon = 1e-12);
        assert_relative_eq!(inv[(1, 1)], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let g = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(g.inverse().is_none());
        assert!(g.condition_inf().is_infinite());
    }

    #[test]
    fn solve_normal_equations_matches_hand_solution() {
        let gram = Matrix::from_rows(&[vec![5.0, 3.0], vec![3.0, 2.0]]);
        let rhs = Matrix::from_rows(&[vec![8.0, 5.0]]);
        let x = solve_normal_equations(&gram, &rhs, 1e12).unwrap();
        assert_relative_eq!(x[(0, 0)], 1.0, epsilon = 1e-10);
        assert_relative_eq!(x[(0, 1)], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn solve_rejects_ill_conditioned_gram() {
        let gram = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]]);
        let rhs = Matrix::from_rows(&[vec![1.0, 1.0]]);
        match solve_normal_equations(&gram, &rhs, 1e12) {
            Err(Error::SingularGram { .. }) => {}
            other => panic!("expected SingularGram, got {other:?}"),
        }
    }

    #[test]
    fn mul_and_transpose_roundtrip() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let at = a.transpose();
        let aat = a.mul_mat(&at);
        assert_eq!(aat.rows(), 2);
        assert_relative_eq!(aat[(0, 0)], 14.0);
        assert_relative_eq!(aat[(0, 1)], 32.0);
        assert_relative_eq!(aat[(1, 1)], 77.0);
        assert_eq!(a.mul_vec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
    }
}
