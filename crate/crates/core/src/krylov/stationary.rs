//! The stationary splitting iteration `x ← x + 𝒫⁻¹(b - ℬx)`.

use std::time::Instant;

use super::{norm, relative_error, ApplyStats, LinearOperator, Preconditioner, SolveFlag, SolveReport};
use crate::error::Result;
use crate::precond::{build_preconditioner, InnerSolveMode, PreconditionerConfig, PreconditionerKind};
use crate::problem::{BlockSaddleSystem, BlockVector, MonolithicForm};

/// Residual growth beyond this factor of the initial residual counts as
/// divergence.
const DIVERGENCE_FACTOR: f64 = 1e12;

/// Runs the splitting iteration from `x = 0` with a fixed preconditioner.
/// With `exact` given, the relative error after every step is recorded.
pub fn stationary_iterate_with(
    op: &impl LinearOperator,
    precond: &(impl Preconditioner + ?Sized),
    b: &[f64],
    tol: f64,
    maxit: usize,
    exact: Option<&[f64]>,
) -> (Vec<f64>, SolveReport) {
    let start = Instant::now();
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut d = vec![0.0; n];
    let mut ax = vec![0.0; n];
    let nb = norm(b);
    let scale = if nb == 0.0 { 1.0 } else { nb };
    let mut hist = vec![norm(&r) / scale];
    let mut err_hist = Vec::new();
    if let Some(e) = exact {
        err_hist.push(relative_error(&x, e));
    }
    let mut inner = ApplyStats::default();
    let mut flag = SolveFlag::MaxIt;
    let mut its = 0;
    if hist[0] <= tol {
        flag = SolveFlag::Converged;
    } else {
        for k in 1..=maxit {
            inner += precond.apply_inverse(&r, &mut d);
            x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += di);
            op.apply(&x, &mut ax);
            r.iter_mut().zip(b.iter().zip(&ax)).for_each(|(ri, (bi, ai))| *ri = bi - ai);
            let res = norm(&r) / scale;
            hist.push(res);
            if let Some(e) = exact {
                err_hist.push(relative_error(&x, e));
            }
            its = k;
            if !res.is_finite() || res > DIVERGENCE_FACTOR * hist[0] {
                flag = SolveFlag::Breakdown;
                break;
            }
            if res <= tol {
                flag = SolveFlag::Converged;
                break;
            }
        }
    }
    let final_res = *hist.last().unwrap();
    let err = err_hist.last().copied();
    (
        x,
        SolveReport {
            iterations: its,
            res_history: hist,
            final_res,
            err,
            err_history: err_hist,
            wall_seconds: start.elapsed().as_secs_f64(),
            flag,
            inner,
        },
    )
}

/// Builds the block triangular preconditioner with exact block solves and
/// iterates on the `SemipositiveB` form of `sys`.
pub fn stationary_iterate(
    sys: &BlockSaddleSystem,
    config: &PreconditionerConfig,
    tol: f64,
    maxit: usize,
) -> Result<(BlockVector, SolveReport)> {
    let mut cfg = config.clone();
    cfg.inner_policy.mode = InnerSolveMode::ExactCholesky;
    let p = build_preconditioner(sys, PreconditionerKind::PTriangular, &cfg)?;
    let op = sys.assemble(MonolithicForm::SemipositiveB);
    let b = sys.rhs_vector(MonolithicForm::SemipositiveB);
    let (x, rep) = stationary_iterate_with(&op, &p, &b, tol, maxit, None);
    Ok((BlockVector::unflatten(&x, sys.n(), sys.m(), sys.l())?, rep))
}
