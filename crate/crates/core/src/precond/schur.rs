use crate::error::{Error, Result};
use crate::problem::BlockSaddleSystem;
use crate::sparse::{CholeskyFactor, CsrMatrix, DenseMatrix, SYMMETRY_TOL};

/// Largest order for which Schur-type blocks are formed densely.
pub const DENSE_SCHUR_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchurMode {
    /// `S = B diag(A)⁻¹ Bᵀ`.
    DiagApprox,
    /// `S = B A⁻¹ Bᵀ`, formed densely.
    Exact,
}

#[derive(Debug, Clone)]
pub struct SchurApprox {
    pub s: CsrMatrix,
    pub mode: SchurMode,
}

/// `B A⁻¹ Bᵀ` column by column from a factorization of `A`.
pub(crate) fn exact_schur_dense(b: &CsrMatrix, a_factor: &CholeskyFactor) -> Result<DenseMatrix> {
    let m = b.nrows();
    if m > DENSE_SCHUR_CAP {
        return Err(Error::Capacity(format!(
            "dense B A⁻¹ Bᵀ of order {m} exceeds cap {DENSE_SCHUR_CAP}"
        )));
    }
    let mut out = DenseMatrix::zeros(m, m);
    let mut col = vec![0.0; b.ncols()];
    let mut u = vec![0.0; b.ncols()];
    let mut su = vec![0.0; m];
    for j in 0..m {
        col.iter_mut().for_each(|v| *v = 0.0);
        // column j of Bᵀ is row j of B
        let (idx, vals) = b.row(j);
        for (&i, &v) in idx.iter().zip(vals) {
            col[i] = v;
        }
        a_factor.solve_into(&col, &mut u);
        b.spmv_into(&u, &mut su);
        out.set_column(j, &su);
    }
    symmetrize(&mut out);
    Ok(out)
}

/// Averages a nearly symmetric dense matrix with its transpose.
pub(crate) fn symmetrize(d: &mut DenseMatrix) {
    let n = d.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (d[(i, j)] + d[(j, i)]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
}

pub(crate) fn diag_approx(sys: &BlockSaddleSystem) -> Result<CsrMatrix> {
    let d = sys.a().diagonal();
    if let Some(i) = d.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NotPositiveDefinite {
            block: "diag(A)".into(),
            pivot: i,
        });
    }
    let w: Vec<f64> = d.iter().map(|x| 1.0 / x).collect();
    sys.b().weighted_gram(&w)
}

/// Builds `S` in the requested mode. `Exact` factors `A` and forms
/// `B A⁻¹ Bᵀ` densely (order at most [`DENSE_SCHUR_CAP`]).
pub fn build_schur(sys: &BlockSaddleSystem, mode: SchurMode) -> Result<SchurApprox> {
    let s = match mode {
        SchurMode::DiagApprox => diag_approx(sys)?,
        SchurMode::Exact => {
            if sys.m() > DENSE_SCHUR_CAP {
                return Err(Error::Capacity(format!(
                    "exact Schur complement of order {} exceeds cap {DENSE_SCHUR_CAP}",
                    sys.m()
                )));
            }
            let fa = CholeskyFactor::new(sys.a(), "A")?;
            CsrMatrix::from_dense(&exact_schur_dense(sys.b(), &fa)?)
        }
    };
    debug_assert!(s.is_symmetric(SYMMETRY_TOL));
    Ok(SchurApprox { s, mode })
}
