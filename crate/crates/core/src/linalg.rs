//! Small dense matrices over any [`Scalar`].
//!
//! Sizes here never exceed 8x8, so everything is written out plainly; the
//! point is that the same Cholesky factor or inverse can be taken of a matrix
//! of jets and carry derivatives along.

use std::ops::{Index, IndexMut};

use crate::jet::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl Mat<f64> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |_, _| 0.0)
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Mat::from_fn(rows.len(), cols, |r, c| rows[r][c])
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)]).collect())
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Mat<f64>) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |r, c| self[(r, c)] - other[(r, c)])
    }

    pub fn scaled(&self, s: f64) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * s)
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += x[r] * self[(r, c)] * y[c];
            }
        }
        acc
    }
}

impl<T: Scalar> Mat<T> {
    pub fn zeros_like(rows: usize, cols: usize, like: &T) -> Self {
        let z = like.zero_like();
        Mat::from_fn(rows, cols, |_, _| z.clone())
    }

    pub fn identity_like(n: usize, like: &T) -> Self {
        let (z, o) = (like.zero_like(), like.lift(1.0));
        Mat::from_fn(n, n, |r, c| if r == c { o.clone() } else { z.clone() })
    }

    pub fn values(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |r, c| self[(r, c)].value())
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat::from_fn(self.rows, self.cols, |r, c| f(&self[(r, c)]))
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        Mat::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = self[(r, 0)].clone() * other[(0, c)].clone();
            for k in 1..self.cols {
                acc = acc + self[(r, k)].clone() * other[(k, c)].clone();
            }
            acc
        })
    }

    pub fn mat_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "mat_vec shape mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = self[(r, 0)].clone() * v[0].clone();
                for k in 1..self.cols {
                    acc = acc + self[(r, k)].clone() * v[k].clone();
                }
                acc
            })
            .collect()
    }

    /// `Aᵀ M A` for a square `M`.
    pub fn congruence(&self, a: &Mat<T>) -> Mat<T> {
        a.transpose().matmul(&self.matmul(a))
    }

    /// Lower-triangular `L` with `A = L Lᵀ`. Fails with the offending pivot
    /// index when `A` is not positive definite.
    pub fn cholesky(&self) -> Result<Mat<T>, usize> {
        assert!(self.is_square());
        let n = self.rows;
        let mut l = Mat::zeros_like(n, n, &self[(0, 0)]);
        for j in 0..n {
            let mut d = self[(j, j)].clone();
            for k in 0..j {
                d = d - l[(j, k)].clone() * l[(j, k)].clone();
            }
            let dv = d.value();
            if !(dv > 0.0) || !dv.is_finite() {
                return Err(j);
            }
            let djj = d.sqrt();
            for i in (j + 1)..n {
                let mut s = self[(i, j)].clone();
                for k in 0..j {
                    s = s - l[(i, k)].clone() * l[(j, k)].clone();
                }
                l[(i, j)] = s / djj.clone();
            }
            l[(j, j)] = djj;
        }
        Ok(l)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting on values.
    pub fn inverse(&self) -> Option<Mat<T>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity_like(n, &self[(0, 0)]);
        let scale = self.values().max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].value().abs().total_cmp(&a[(j, col)].value().abs()))?;
            if a[(pivot, col)].value().abs() <= 1e-14 * scale {
                return None;
            }
            if pivot != col {
                for c in 0..n {
                    a.data.swap(pivot * n + c, col * n + c);
                    inv.data.swap(pivot * n + c, col * n + c);
                }
            }
            let p = a[(col, col)].recip();
            for c in 0..n {
                a[(col, c)] = a[(col, c)].clone() * p.clone();
                inv[(col, c)] = inv[(col, c)].clone() * p.clone();
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for c in 0..n {
                    a[(r, c)] = a[(r, c)].clone() - factor.clone() * a[(col, c)].clone();
                    inv[(r, c)] = inv[(r, c)].clone() - factor.clone() * inv[(col, c)].clone();
                }
            }
        }
        Some(inv)
    }

    /// Solves `Lᵀ x = b` for lower-triangular `L`.
    pub fn solve_upper_transpose(&self, b: &[T]) -> Vec<T> {
        let n = self.rows;
        let mut x: Vec<T> = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i].clone();
            for k in (i + 1)..n {
                s = s - self[(k, i)].clone() * x[k].clone();
            }
            x[i] = s / self[(i, i)].clone();
        }
        x
    }
}

/// Gram-Schmidt orthonormalization of the columns of `vectors` with respect
/// to the inner product `metric`. Returns the orthonormal columns.
pub fn orthonormalize(metric: &Mat<f64>, vectors: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        // two passes for numerical stability
        for _ in 0..2 {
            for e in &out {
                let p = metric.bilinear(e, &w);
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= p * ei;
                }
            }
        }
        let norm2 = metric.bilinear(&w, &w);
        if !(norm2 > 1e-24) {
            return None;
        }
        let norm = norm2.sqrt();
        out.push(w.iter().map(|x| x / norm).collect());
    }
    Some(out)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
