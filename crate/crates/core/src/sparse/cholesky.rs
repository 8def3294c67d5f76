//! Envelope (skyline) Cholesky factorization `P M Pᵀ = L Lᵀ`.
//!
//! Rows of `L` are stored densely from their first nonzero column to the
//! diagonal. Fill is confined to the envelope, so the ordering matters; the
//! smaller of the natural and reverse Cuthill-McKee envelopes is used.

use crate::error::{check_len, Error, Result};
use crate::sparse::ordering::{envelope_size, reverse_cuthill_mckee};
use crate::sparse::CsrMatrix;

/// Relative tolerance of the symmetry check performed before factoring.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    dim: usize,
    /// `perm[new] = old`; `None` when the natural order was kept.
    perm: Option<Vec<usize>>,
    /// First stored column of each row of `L`.
    first: Vec<usize>,
    /// Offset of each row's slice in `values`; row `i` occupies
    /// `values[start[i]..start[i + 1]]` covering columns `first[i]..=i`.
    start: Vec<usize>,
    values: Vec<f64>,
}

impl CholeskyFactor {
    /// Factors `m`; `block` names the matrix in definiteness errors.
    pub fn new(m: &CsrMatrix, block: &str) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::Usage(format!(
                "Cholesky of non-square {block} ({}x{})",
                m.nrows(),
                m.ncols()
            )));
        }
        if !m.is_symmetric(SYMMETRY_TOL) {
            return Err(Error::Usage(format!("Cholesky of non-symmetric {block}")));
        }
        let rcm = reverse_cuthill_mckee(m);
        let perm = if envelope_size(m, Some(&rcm)) < envelope_size(m, None) {
            Some(rcm)
        } else {
            None
        };
        let pm = match &perm {
            Some(p) => m.permute_symmetric(p)?,
            None => m.clone(),
        };

        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in pm.triplets() {
            if j < i {
                first[i] = first[i].min(j);
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0usize);
        for i in 0..n {
            let len = i - first[i] + 1;
            let next = start[i].checked_add(len).ok_or_else(|| {
                Error::Capacity(format!("envelope of {block} overflows the index type"))
            })?;
            start.push(next);
        }
        let mut values = vec![0.0; start[n]];
        for (i, j, v) in pm.triplets() {
            if j <= i {
                values[start[i] + j - first[i]] = v;
            }
        }

        let tiny = n as f64 * f64::EPSILON;
        for i in 0..n {
            let fi = first[i];
            let aii = values[start[i + 1] - 1];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let ri = &values[start[i] + k0 - fi..start[i] + j - fi];
                let rj = &values[start[j] + k0 - fj..start[j] + j - fj];
                let s: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                let ljj = values[start[j + 1] - 1];
                let idx = start[i] + j - fi;
                values[idx] = (values[idx] - s) / ljj;
            }
            let row = &values[start[i]..start[i + 1] - 1];
            let d = aii - row.iter().map(|v| v * v).sum::<f64>();
            if !(d > 0.0) || d <= tiny * aii.abs() {
                let pivot = perm.as_ref().map_or(i, |p| p[i]);
                return Err(Error::NotPositiveDefinite {
                    block: block.to_string(),
                    pivot,
                });
            }
            values[start[i + 1] - 1] = d.sqrt();
        }
        Ok(Self {
            dim: n,
            perm,
            first,
            start,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn permutation(&self) -> Option<&[usize]> {
        self.perm.as_deref()
    }

    /// Stored entries of `L` (envelope size).
    pub fn factor_nnz(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len("Cholesky rhs", self.dim, rhs.len())?;
        let mut out = vec![0.0; self.dim];
        self.solve_into(rhs, &mut out);
        Ok(out)
    }

    /// Allocation-light solve; panics on length mismatch.
    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) {
        assert_eq!(rhs.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        let n = self.dim;
        let mut y = match &self.perm {
            Some(p) => p.iter().map(|&old| rhs[old]).collect::<Vec<f64>>(),
            None => rhs.to_vec(),
        };
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (yj, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yj -= l * yi;
            }
        }
        match &self.perm {
            Some(p) => {
                for (new, &old) in p.iter().enumerate() {
                    out[old] = y[new];
                }
            }
            None => out.copy_from_slice(&y),
        }
    }

    /// Diagonal of `L` in the factored (possibly permuted) order.
    pub fn factor_diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.values[self.start[i + 1] - 1]).collect()
    }
}

pub fn cholesky_factor(m: &CsrMatrix) -> Result<CholeskyFactor> {
    CholeskyFactor::new(m, "matrix")
}

pub fn cholesky_solve(f: &CholeskyFactor, rhs: &[f64]) -> Result<Vec<f64>> {
    f.solve(rhs)
}
