//! Small dense matrices.
//!
//! Everything in this crate works on matrices of side at most a few hundred
//! (cost matrices) and determinants/eigenvalues of side n − 1 ≤ 10, so a
//! plain row-major `Vec<f64>` with LU and cyclic Jacobi is all we need.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::dimension("matrix needs at least one row"));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dimension("ragged rows"));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Rank-one outer product a bᵀ.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        Matrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j])
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn scale(&self, s: f64) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dimension("matrix add shapes differ"));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::dimension("matvec length"));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        let mv = self.matvec(v)?;
        Ok(v.iter().zip(&mv).map(|(a, b)| a * b).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Delete one row and one column (for permanent cofactors).
    pub fn minor(&self, drop_row: usize, drop_col: usize) -> Self {
        let mut out = Matrix::zeros(self.rows - 1, self.cols - 1);
        let mut r = 0;
        for i in 0..self.rows {
            if i == drop_row {
                continue;
            }
            let mut c = 0;
            for j in 0..self.cols {
                if j == drop_col {
                    continue;
                }
                out.set(r, c, self.get(i, j));
                c += 1;
            }
            r += 1;
        }
        out
    }

    /// Signed determinant by LU with partial pivoting.
    pub fn det(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::dimension("determinant of non-square matrix"));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].abs();
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                return Ok(0.0);
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            det *= a[k * n + k];
            let inv = 1.0 / a[k * n + k];
            for i in k + 1..n {
                let factor = a[i * n + k] * inv;
                a[i * n + k] = 0.0;
                for j in k + 1..n {
                    a[i * n + j] -= factor * a[k * n + j];
                }
            }
        }
        Ok(det)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.
    pub fn eigenvalues_symmetric(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::dimension("eigenvalues of non-square matrix"));
        }
        let n = self.rows;
        if n == 1 {
            return Ok(vec![self.get(0, 0)]);
        }
        let mut a = self.data.clone();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
            if off.sqrt() < 1e-14 * (1.0 + self.max_abs()) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(eig)
    }

    pub fn min_eigenvalue_symmetric(&self) -> Result<f64> {
        Ok(self.eigenvalues_symmetric()?[0])
    }
}

/// Orthonormal basis of the tangent space {v : Σvᵢ = 0} ⊂ ℝⁿ (Helmert
/// columns), as an n × (n−1) matrix.
pub fn tangent_basis(n: usize) -> Matrix {
    let mut b = Matrix::zeros(n, n - 1);
    for k in 1..n {
        let norm = (k as f64 * (k as f64 + 1.0)).sqrt();
        for i in 0..k {
            b.set(i, k - 1, 1.0 / norm);
        }
        b.set(k, k - 1, -(k as f64) / norm);
    }
    b
}

/// Restrict a symmetric n × n quadratic form to the tangent space: BᵀMB.
pub fn tangent_restrict(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::dimension("tangent restriction needs square matrix"));
    }
    let n = m.rows();
    let b = tangent_basis(n);
    let mut out = Matrix::zeros(n - 1, n - 1);
    for a in 0..n - 1 {
        for c in 0..n - 1 {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += b.get(i, a) * m.get(i, j) * b.get(j, c);
                }
            }
            out.set(a, c, acc);
        }
    }
    Ok(out)
}
