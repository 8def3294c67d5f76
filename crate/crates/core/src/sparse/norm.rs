//! Extremal singular value estimates by power and inverse power iteration.

use crate::error::{Error, Result};
use crate::sparse::{CholeskyFactor, CsrMatrix};

pub const DEFAULT_NORM_TOL: f64 = 1e-8;
pub const DEFAULT_NORM_MAXIT: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norm2Estimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Applies the Gram matrix on the shorter side of `m`.
struct Gram<'a> {
    m: &'a CsrMatrix,
    rows_side: bool,
    tmp: Vec<f64>,
}

impl<'a> Gram<'a> {
    fn new(m: &'a CsrMatrix) -> Self {
        let rows_side = m.nrows() <= m.ncols();
        let tmp = vec![0.0; if rows_side { m.ncols() } else { m.nrows() }];
        Self { m, rows_side, tmp }
    }

    fn dim(&self) -> usize {
        if self.rows_side {
            self.m.nrows()
        } else {
            self.m.ncols()
        }
    }

    fn apply(&mut self, v: &[f64], out: &mut [f64]) {
        if self.rows_side {
            self.m.spmv_transpose_into(v, &mut self.tmp);
            self.m.spmv_into(&self.tmp, out);
        } else {
            self.m.spmv_into(v, &mut self.tmp);
            self.m.spmv_transpose_into(&self.tmp, out);
        }
    }
}

/// `σ_max(m)` by power iteration on `MMᵀ` or `MᵀM`, whichever is smaller.
///
/// The seed is the normalized all-ones vector. Iteration stops once two
/// successive square roots of the Rayleigh quotient agree to `tol`
/// relatively. A non-converged estimate is still returned, flagged.
pub fn norm2_estimate(m: &CsrMatrix, tol: f64, maxit: usize) -> Result<Norm2Estimate> {
    if m.max_abs() == 0.0 {
        return Err(Error::Usage("norm estimate of a zero matrix".into()));
    }
    let mut g = Gram::new(m);
    let d = g.dim();
    let mut v = vec![1.0; d];
    normalize(&mut v);
    let mut w = vec![0.0; d];
    g.apply(&v, &mut w);
    if dot(&w, &w) == 0.0 {
        // the all-ones seed lies in the null space; restart from the
        // coordinate with the largest Gram diagonal
        let diag: Vec<f64> = if g.rows_side {
            (0..m.nrows()).map(|i| m.row(i).1.iter().map(|x| x * x).sum()).collect()
        } else {
            let mut c = vec![0.0; m.ncols()];
            for (_, j, x) in m.triplets() {
                c[j] += x * x;
            }
            c
        };
        let jmax = (0..d).max_by(|&a, &b| diag[a].total_cmp(&diag[b])).unwrap();
        v.iter_mut().for_each(|x| *x = 0.0);
        v[jmax] = 1.0;
        g.apply(&v, &mut w);
    }
    let mut sigma = dot(&v, &w).max(0.0).sqrt();
    let mut converged = false;
    let mut it = 0;
    while it < maxit {
        it += 1;
        v.copy_from_slice(&w);
        if normalize(&mut v) == 0.0 {
            break;
        }
        g.apply(&v, &mut w);
        let next = dot(&v, &w).max(0.0).sqrt();
        let done = (next - sigma).abs() <= tol * next;
        sigma = next;
        if done {
            converged = true;
            break;
        }
    }
    // any column norm is a lower bound on the largest singular value
    let value = sigma.max(m.max_column_norm());
    Ok(Norm2Estimate {
        value,
        converged,
        iterations: it,
    })
}

/// `σ_min` of the shorter side of `m` (the smallest singular value when `m`
/// has full rank along that side) by inverse iteration with a Cholesky
/// factorization of the Gram matrix.
pub fn sigma_min_estimate(m: &CsrMatrix, tol: f64, maxit: usize) -> Result<Norm2Estimate> {
    let gram = if m.nrows() <= m.ncols() {
        m.gram()
    } else {
        m.transpose().gram()
    };
    let f = match CholeskyFactor::new(&gram, "Gram matrix") {
        Ok(f) => f,
        Err(Error::NotPositiveDefinite { .. }) => {
            return Err(Error::Rank("Gram matrix is singular; matrix is rank deficient".into()))
        }
        Err(e) => return Err(e),
    };
    let d = gram.nrows();
    let mut v = vec![1.0; d];
    normalize(&mut v);
    let mut w = vec![0.0; d];
    let mut mu = 0.0;
    let mut converged = false;
    let mut it = 0;
    while it < maxit {
        it += 1;
        f.solve_into(&v, &mut w);
        // Rayleigh quotient of the inverse
        let next = dot(&v, &w);
        v.copy_from_slice(&w);
        normalize(&mut v);
        let done = it > 1 && (next - mu).abs() <= tol * next.abs();
        mu = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(Norm2Estimate {
        value: (1.0 / mu).max(0.0).sqrt(),
        converged,
        iterations: it,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_norms() {
        let m = CsrMatrix::from_diagonal(&[3.0, 1.0]);
        let e = norm2_estimate(&m, DEFAULT_NORM_TOL, DEFAULT_NORM_MAXIT).unwrap();
        assert!((e.value - 3.0).abs() < 1e-8);
        assert!(e.converged);
        let s = sigma_min_estimate(&m, DEFAULT_NORM_TOL, DEFAULT_NORM_MAXIT).unwrap();
        assert!((s.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identity_norm_is_one() {
        let e = norm2_estimate(&CsrMatrix::identity(5), 1e-8, 500).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn seed_in_null_space() {
        let m = CsrMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, -1.0)]).unwrap();
        let e = norm2_estimate(&m, 1e-10, 100).unwrap();
        assert!((e.value - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_rejected() {
        assert!(matches!(
            norm2_estimate(&CsrMatrix::zeros(2, 2), 1e-8, 10),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn rank_deficient_sigma_min() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert!(matches!(sigma_min_estimate(&m, 1e-8, 100), Err(Error::Rank(_))));
    }

    #[test]
    fn maxit_reached_is_flagged() {
        let m = CsrMatrix::from_diagonal(&[1.0, 0.999, 0.5]);
        let e = norm2_estimate(&m, 1e-15, 2).unwrap();
        assert!(!e.converged);
        assert_eq!(e.iterations, 2);
    }
}
