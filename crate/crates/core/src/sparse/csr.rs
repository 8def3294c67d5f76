//! Compressed sparse row storage.
//!
//! `CsrMatrix` is the only sparse format in the crate. Every constructor
//! produces strictly increasing column indices within each row and drops
//! entries that are exactly zero, so two matrices with the same values have
//! the same representation.

use crate::error::{check_len, Error, Result};
use crate::sparse::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_len("row_ptr", nrows + 1, row_ptr.len())?;
        check_len("col_idx/values", col_idx.len(), values.len())?;
        if row_ptr[0] != 0 || row_ptr[nrows] != col_idx.len() {
            return Err(Error::Usage("row_ptr must start at 0 and end at nnz".into()));
        }
        for i in 0..nrows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::Usage(format!("row_ptr decreases at row {i}")));
            }
            for k in lo..hi {
                if col_idx[k] >= ncols {
                    return Err(Error::Usage(format!(
                        "column index {} out of range in row {i}",
                        col_idx[k]
                    )));
                }
                if k > lo && col_idx[k] <= col_idx[k - 1] {
                    return Err(Error::Usage(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
            }
        }
        let mut m = Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        };
        m.drop_zeros();
        Ok(m)
    }

    /// Assembles from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::Usage(format!(
                    "triplet ({i}, {j}) outside {nrows}x{ncols}"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < scratch.len() {
                let j = scratch[k].0;
                let mut sum = 0.0;
                while k < scratch.len() && scratch[k].0 == j {
                    sum += scratch[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    col_idx.push(j);
                    values.push(sum);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, &d) in diag.iter().enumerate() {
            if d != 0.0 {
                col_idx.push(i);
                values.push(d);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows: n,
            ncols: n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Converts a dense matrix, keeping every nonzero entry.
    pub fn from_dense(d: &DenseMatrix) -> Self {
        let mut row_ptr = Vec::with_capacity(d.nrows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..d.nrows() {
            for (j, &v) in d.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows: d.nrows(),
            ncols: d.ncols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `scale * tridiag(lower, diag, upper)` of order `size`.
    pub fn tridiag(lower: f64, diag: f64, upper: f64, size: usize, scale: f64) -> Result<Self> {
        if size == 0 {
            return Err(Error::Usage("tridiag size must be at least 1".into()));
        }
        let mut t = Vec::with_capacity(3 * size);
        for i in 0..size {
            if i > 0 {
                t.push((i, i - 1, scale * lower));
            }
            t.push((i, i, scale * diag));
            if i + 1 < size {
                t.push((i, i + 1, scale * upper));
            }
        }
        Self::from_triplets(size, size, &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    fn drop_zeros(&mut self) {
        if !self.values.contains(&0.0) {
            return;
        }
        let mut w = 0;
        let mut start = 0;
        for i in 0..self.nrows {
            let end = self.row_ptr[i + 1];
            for k in start..end {
                if self.values[k] != 0.0 {
                    self.col_idx[w] = self.col_idx[k];
                    self.values[w] = self.values[k];
                    w += 1;
                }
            }
            start = end;
            self.row_ptr[i + 1] = w;
        }
        self.col_idx.truncate(w);
        self.values.truncate(w);
    }

    /// `y = M v`.
    pub fn spmv(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("spmv input", self.ncols, v.len())?;
        let mut out = vec![0.0; self.nrows];
        self.spmv_into(v, &mut out);
        Ok(out)
    }

    /// Unchecked-shape product into a caller buffer. Panics on length mismatch.
    pub fn spmv_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.ncols);
        assert_eq!(out.len(), self.nrows);
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * v[self.col_idx[k]];
            }
            *o = acc;
        }
    }

    /// `y = Mᵀ v` without forming the transpose.
    pub fn spmv_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("spmv_transpose input", self.nrows, v.len())?;
        let mut out = vec![0.0; self.ncols];
        self.spmv_transpose_into(v, &mut out);
        Ok(out)
    }

    pub fn spmv_transpose_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.nrows);
        assert_eq!(out.len(), self.ncols);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.col_idx[k]] += self.values[k] * vi;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                col_idx[next[j]] = i;
                values[next[j]] = self.values[k];
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.drop_zeros();
        out
    }

    /// `a * self + b * other`.
    pub fn add_scaled(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_len("add rows", self.nrows, other.nrows)?;
        check_len("add cols", self.ncols, other.ncols)?;
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_ptr.push(0);
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let (j, v) = if q == cb.len() || (p < ca.len() && ca[p] < cb[q]) {
                    p += 1;
                    (ca[p - 1], a * va[p - 1])
                } else if p == ca.len() || cb[q] < ca[p] {
                    q += 1;
                    (cb[q - 1], b * vb[q - 1])
                } else {
                    p += 1;
                    q += 1;
                    (ca[p - 1], a * va[p - 1] + b * vb[q - 1])
                };
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Sparse product `self * other` (Gustavson).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_len("matmul inner dimension", self.ncols, other.nrows)?;
        let mut acc = vec![0.0; other.ncols];
        let mut marker = vec![usize::MAX; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.nrows {
            touched.clear();
            let (ca, va) = self.row(i);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = other.row(k);
                for (&j, &b) in cb.iter().zip(vb) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != 0.0 {
                    col_idx.push(j);
                    values.push(acc[j]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: other.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// `M Mᵀ`.
    pub fn gram(&self) -> Self {
        self.matmul(&self.transpose())
            .expect("inner dimensions agree by construction")
    }

    /// `M D Mᵀ` for a diagonal `D` given by its entries.
    pub fn weighted_gram(&self, weights: &[f64]) -> Result<Self> {
        check_len("weighted_gram weights", self.ncols, weights.len())?;
        let mut scaled = self.clone();
        for k in 0..scaled.nnz() {
            scaled.values[k] *= weights[scaled.col_idx[k]];
        }
        scaled.matmul(&self.transpose())
    }

    /// `shift * I + scale * self` for a square matrix.
    pub fn shifted(&self, shift: f64, scale: f64) -> Result<Self> {
        if self.nrows != self.ncols {
            return Err(Error::Usage("shift of a non-square matrix".into()));
        }
        Self::identity(self.nrows).add_scaled(shift, self, scale)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let nrows = self
            .nrows
            .checked_mul(other.nrows)
            .ok_or_else(|| Error::Capacity("kron row count overflows".into()))?;
        let ncols = self
            .ncols
            .checked_mul(other.ncols)
            .ok_or_else(|| Error::Capacity("kron column count overflows".into()))?;
        let nnz = self
            .nnz()
            .checked_mul(other.nnz())
            .ok_or_else(|| Error::Capacity("kron nnz overflows".into()))?;
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            for k in 0..other.nrows {
                let (cb, vb) = other.row(k);
                for (&j, &a) in ca.iter().zip(va) {
                    for (&l, &b) in cb.iter().zip(vb) {
                        let v = a * b;
                        if v != 0.0 {
                            col_idx.push(j * other.ncols + l);
                            values.push(v);
                        }
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Assembles a block matrix from a grid; `None` marks a zero block.
    ///
    /// Every block row needs at least one present block to fix its height,
    /// and likewise every block column.
    pub fn block(grid: &[Vec<Option<&CsrMatrix>>]) -> Result<Self> {
        let nbr = grid.len();
        if nbr == 0 {
            return Ok(Self::zeros(0, 0));
        }
        let nbc = grid[0].len();
        if grid.iter().any(|r| r.len() != nbc) {
            return Err(Error::Usage("ragged block grid".into()));
        }
        let mut heights = vec![None; nbr];
        let mut widths = vec![None; nbc];
        for (bi, row) in grid.iter().enumerate() {
            for (bj, blk) in row.iter().enumerate() {
                if let Some(m) = blk {
                    for (slot, val, what) in [
                        (&mut heights[bi], m.nrows, "block row height"),
                        (&mut widths[bj], m.ncols, "block column width"),
                    ] {
                        match slot {
                            Some(prev) if *prev != val => {
                                return Err(Error::DimensionMismatch {
                                    context: what,
                                    expected: *prev,
                                    found: val,
                                })
                            }
                            _ => *slot = Some(val),
                        }
                    }
                }
            }
        }
        let heights: Vec<usize> = heights
            .into_iter()
            .map(|h| h.ok_or_else(|| Error::Usage("block row with no blocks".into())))
            .collect::<Result<_>>()?;
        let widths: Vec<usize> = widths
            .into_iter()
            .map(|w| w.ok_or_else(|| Error::Usage("block column with no blocks".into())))
            .collect::<Result<_>>()?;
        let mut col_off = vec![0usize; nbc + 1];
        for j in 0..nbc {
            col_off[j + 1] = col_off[j] + widths[j];
        }
        let nrows: usize = heights.iter().sum();
        let ncols = col_off[nbc];
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (bi, row) in grid.iter().enumerate() {
            for i in 0..heights[bi] {
                for (bj, blk) in row.iter().enumerate() {
                    if let Some(m) = blk {
                        let (c, v) = m.row(i);
                        col_idx.extend(c.iter().map(|&j| j + col_off[bj]));
                        values.extend_from_slice(v);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn hstack(blocks: &[&CsrMatrix]) -> Result<Self> {
        Self::block(&[blocks.iter().map(|b| Some(*b)).collect()])
    }

    pub fn vstack(blocks: &[&CsrMatrix]) -> Result<Self> {
        let grid: Vec<Vec<Option<&CsrMatrix>>> = blocks.iter().map(|b| vec![Some(*b)]).collect();
        Self::block(&grid)
    }

    pub fn block_diag(blocks: &[&CsrMatrix]) -> Result<Self> {
        let mut triplets = Vec::new();
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            triplets.extend(b.triplets().map(|(i, j, v)| (i + r0, j + c0, v)));
            r0 += b.nrows;
            c0 += b.ncols;
        }
        Self::from_triplets(r0, c0, &triplets)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest 2-norm over the columns.
    pub fn max_column_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.ncols];
        for (&j, &v) in self.col_idx.iter().zip(&self.values) {
            sums[j] += v * v;
        }
        sums.into_iter().fold(0.0, f64::max).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Symmetry in pattern and values, with `|a_ij - a_ji| <= rel_tol * max|a|`.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let t = self.transpose();
        let tol = rel_tol * self.max_abs();
        if t.row_ptr == self.row_ptr && t.col_idx == self.col_idx {
            return self
                .values
                .iter()
                .zip(&t.values)
                .all(|(a, b)| (a - b).abs() <= tol);
        }
        match self.add_scaled(1.0, &t, -1.0) {
            Ok(d) => d.max_abs() <= tol,
            Err(_) => false,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// Permutes rows and columns symmetrically: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Result<Self> {
        check_len("permutation", self.nrows, perm.len())?;
        let mut inv = vec![0usize; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let t: Vec<(usize, usize, f64)> = self
            .triplets()
            .map(|(i, j, v)| (inv[i], inv[j], v))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, &t)
    }
}
