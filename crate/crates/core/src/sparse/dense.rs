//! Small row-major dense matrices for spectral work and oracles.

use std::ops::{Index, IndexMut};

use crate::error::{check_len, Error, Result};
use crate::sparse::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            values: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(nrows: usize, ncols: usize, values: Vec<f64>) -> Result<Self> {
        check_len("dense values", nrows * ncols, values.len())?;
        Ok(Self {
            nrows,
            ncols,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(nrows * ncols);
        for r in rows {
            check_len("dense row", ncols, r.len())?;
            values.extend_from_slice(r);
        }
        Ok(Self {
            nrows,
            ncols,
            values,
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.nrows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[f64]) {
        assert_eq!(col.len(), self.nrows);
        for (i, &v) in col.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul inner dimension");
        let mut out = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.values[i * other.ncols..(i + 1) * other.ncols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("dense matvec", self.ncols, v.len())?;
        Ok((0..self.nrows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `a * self + b * other`.
    pub fn add_scaled(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Solves `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if self.nrows != self.ncols {
            return Err(Error::Usage("solve with a non-square matrix".into()));
        }
        check_len("dense solve rhs rows", self.nrows, rhs.nrows)?;
        let mut lu = self.values.clone();
        let piv = lu_factor(self.nrows, &mut lu)?;
        let mut x = rhs.values.clone();
        lu_solve(self.nrows, &lu, &piv, &mut x, rhs.ncols);
        Ok(Self {
            nrows: rhs.nrows,
            ncols: rhs.ncols,
            values: x,
        })
    }

    pub fn solve_vec(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = Self::from_row_major(rhs.len(), 1, rhs.to_vec())?;
        Ok(self.solve(&b)?.values)
    }

    /// Rank by Gaussian elimination with full pivoting and a relative threshold.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let mut a = self.values.clone();
        let (r, c) = (self.nrows, self.ncols);
        let tol = rel_tol * self.max_abs().max(f64::MIN_POSITIVE);
        let mut rank = 0;
        let mut row_used = vec![false; r];
        let mut col_used = vec![false; c];
        for _ in 0..r.min(c) {
            let mut best = (0.0, 0, 0);
            for i in (0..r).filter(|&i| !row_used[i]) {
                for j in (0..c).filter(|&j| !col_used[j]) {
                    if a[i * c + j].abs() > best.0 {
                        best = (a[i * c + j].abs(), i, j);
                    }
                }
            }
            if best.0 <= tol {
                break;
            }
            let (_, pi, pj) = best;
            row_used[pi] = true;
            col_used[pj] = true;
            rank += 1;
            let pv = a[pi * c + pj];
            for i in (0..r).filter(|&i| !row_used[i]) {
                let f = a[i * c + pj] / pv;
                if f != 0.0 {
                    for j in 0..c {
                        a[i * c + j] -= f * a[pi * c + j];
                    }
                }
            }
        }
        rank
    }

    pub(crate) fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.values[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.values[i * self.ncols + j]
    }
}

/// In-place LU with partial pivoting of a row-major `n x n` array.
pub(crate) fn lu_factor<T: Scalar>(n: usize, a: &mut [T]) -> Result<Vec<usize>> {
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == T::zero() {
            return Err(Error::Numerical(format!("singular matrix at LU column {k}")));
        }
        if p != k {
            piv.swap(k, p);
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
        }
        let pv = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / pv;
            a[i * n + k] = f;
            if f != T::zero() {
                for j in k + 1..n {
                    let u = a[k * n + j];
                    a[i * n + j] -= f * u;
                }
            }
        }
    }
    Ok(piv)
}

/// Solves with the factors from [`lu_factor`]; `b` is row-major `n x nrhs`.
pub(crate) fn lu_solve<T: Scalar>(n: usize, lu: &[T], piv: &[usize], b: &mut [T], nrhs: usize) {
    let orig = b.to_vec();
    for (i, &p) in piv.iter().enumerate() {
        b[i * nrhs..(i + 1) * nrhs].copy_from_slice(&orig[p * nrhs..(p + 1) * nrhs]);
    }
    for i in 0..n {
        for k in 0..i {
            let l = lu[i * n + k];
            if l != T::zero() {
                for c in 0..nrhs {
                    let v = b[k * nrhs + c];
                    b[i * nrhs + c] -= l * v;
                }
            }
        }
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let u = lu[i * n + k];
            if u != T::zero() {
                for c in 0..nrhs {
                    let v = b[k * nrhs + c];
                    b[i * nrhs + c] -= u * v;
                }
            }
        }
        let d = lu[i * n + i];
        for c in 0..nrhs {
            b[i * nrhs + c] /= d;
        }
    }
}
