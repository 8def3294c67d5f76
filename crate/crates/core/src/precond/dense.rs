//! Dense assembly of preconditioners, for small-scale checks and spectra.

use super::schur::{exact_schur_dense, DENSE_SCHUR_CAP};
use super::{PreconditionerConfig, PreconditionerInstance, PreconditionerKind, SchurMode};
use crate::error::{Error, Result};
use crate::krylov::Preconditioner;
use crate::problem::{BlockSaddleSystem, MonolithicForm};
use crate::sparse::{CholeskyFactor, CsrMatrix, DenseMatrix, DENSE_EIGEN_CAP};

fn put(dst: &mut DenseMatrix, r0: usize, c0: usize, blk: &DenseMatrix, scale: f64) {
    for i in 0..blk.nrows() {
        for j in 0..blk.ncols() {
            dst[(r0 + i, c0 + j)] += scale * blk[(i, j)];
        }
    }
}

/// The kind's matrix in its native form, assembled densely. Schur-type
/// blocks are formed in the configured mode.
pub fn assemble_dense(
    sys: &BlockSaddleSystem,
    kind: PreconditionerKind,
    config: &PreconditionerConfig,
) -> Result<DenseMatrix> {
    let (n, m, l) = (sys.n(), sys.m(), sys.l());
    let dim = n + m + l;
    if dim > DENSE_EIGEN_CAP {
        return Err(Error::Capacity(format!("dense preconditioner of order {dim} exceeds cap {DENSE_EIGEN_CAP}")));
    }
    let mut p = DenseMatrix::zeros(dim, dim);
    if kind == PreconditionerKind::Identity {
        return Ok(DenseMatrix::identity(dim));
    }
    let a = sys.a().to_dense();
    let b = sys.b().to_dense();
    let bt = b.transpose();
    let c = sys.c().to_dense();
    let ct = c.transpose();
    put(&mut p, 0, 0, &a, 1.0);
    match kind {
        PreconditionerKind::Identity => unreachable!(),
        PreconditionerKind::PTriangular | PreconditionerKind::PD1 => {
            let (al, be) = (config.alpha, config.beta);
            let bb = sys.b().gram().shifted(al, be)?.to_dense();
            let cc = sys.c().gram().shifted(al, be)?.to_dense();
            put(&mut p, n, n, &bb, 1.0);
            put(&mut p, n + m, n + m, &cc, 1.0);
            if kind == PreconditionerKind::PTriangular {
                put(&mut p, 0, n, &bt, 1.0);
                put(&mut p, n, n + m, &ct, -1.0);
            }
        }
        _ => {
            let s = match config.schur_mode {
                SchurMode::DiagApprox => super::schur::diag_approx(sys)?.to_dense(),
                SchurMode::Exact => {
                    if m > DENSE_SCHUR_CAP {
                        return Err(Error::Capacity("exact Schur complement too large".into()));
                    }
                    exact_schur_dense(sys.b(), &CholeskyFactor::new(sys.a(), "A")?)?
                }
            };
            let sinv_ct = s.solve(&ct)?;
            let k = c.matmul(&sinv_ct);
            let ksign = if kind == PreconditionerKind::PD2 || kind == PreconditionerKind::P1 {
                1.0
            } else {
                -1.0
            };
            put(&mut p, n + m, n + m, &k, ksign);
            match kind {
                PreconditionerKind::PD2 => put(&mut p, n, n, &s, 1.0),
                PreconditionerKind::P1 | PreconditionerKind::P2 => {
                    put(&mut p, n, 0, &b, 1.0);
                    put(&mut p, n, n, &s, -1.0);
                    put(&mut p, n, n + m, &ct, 1.0);
                }
                PreconditionerKind::P3 => {
                    put(&mut p, 0, n, &bt, 1.0);
                    put(&mut p, n, 0, &b, 1.0);
                    put(&mut p, n, n, &s, -1.0);
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(p)
}

/// `𝒫⁻¹ M` for the `form` matrix `M`, built column by column through the
/// instance's own application routine (with the `J` adaptation when the
/// form differs from the kind's native one).
pub fn preconditioned_dense(
    inst: &PreconditionerInstance,
    sys: &BlockSaddleSystem,
    form: MonolithicForm,
) -> Result<DenseMatrix> {
    let dim = sys.dim();
    if dim > DENSE_EIGEN_CAP {
        return Err(Error::Capacity(format!("dense operator of order {dim} exceeds cap {DENSE_EIGEN_CAP}")));
    }
    let inst = inst.clone().with_outer_form(form);
    let mt: CsrMatrix = sys.assemble(form).transpose();
    let mut out = DenseMatrix::zeros(dim, dim);
    let mut col = vec![0.0; dim];
    let mut res = vec![0.0; dim];
    for j in 0..dim {
        col.iter_mut().for_each(|v| *v = 0.0);
        let (idx, vals) = mt.row(j);
        for (&i, &v) in idx.iter().zip(vals) {
            col[i] = v;
        }
        inst.apply_inverse(&col, &mut res);
        out.set_column(j, &res);
    }
    Ok(out)
}
