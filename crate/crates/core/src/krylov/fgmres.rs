//! Flexible GMRES with right preconditioning, no restarts.

use std::time::Instant;

use super::{dot, norm, ApplyStats, LinearOperator, Preconditioner, SolveFlag, SolveParams, SolveReport};

/// Second Gram-Schmidt pass when orthogonalization removed more than this
/// fraction of the norm.
const REORTH_RATIO: f64 = 0.7;

/// Solves `op·x = b` from `x = 0`.
///
/// The preconditioned directions `z_j = M⁻¹ v_j` are stored, so `M` may
/// change between iterations. After every Arnoldi step the iterate is
/// formed and the true relative residual `‖b - op·x‖/‖b‖` is recomputed;
/// that value drives the stopping test and the history.
pub fn fgmres(
    op: &impl LinearOperator,
    precond: &(impl Preconditioner + ?Sized),
    b: &[f64],
    params: &SolveParams,
) -> (Vec<f64>, SolveReport) {
    let start = Instant::now();
    let n = b.len();
    assert_eq!(op.dim(), n, "fgmres: operator and rhs dimensions differ");
    assert_eq!(precond.dim(), n, "fgmres: preconditioner and rhs dimensions differ");

    let mut x = vec![0.0; n];
    let mut inner = ApplyStats::default();
    let beta = norm(b);
    let finish = |x: Vec<f64>, its, hist: Vec<f64>, flag, inner| {
        let final_res = *hist.last().unwrap();
        (
            x,
            SolveReport {
                iterations: its,
                res_history: hist,
                final_res,
                err: None,
                err_history: Vec::new(),
                wall_seconds: start.elapsed().as_secs_f64(),
                flag,
                inner,
            },
        )
    };
    if beta == 0.0 {
        return finish(x, 0, vec![0.0], SolveFlag::Converged, inner);
    }
    if !beta.is_finite() {
        return finish(x, 0, vec![f64::NAN], SolveFlag::Breakdown, inner);
    }
    let mut hist = vec![1.0];
    if params.maxit == 0 {
        return finish(x, 0, hist, SolveFlag::MaxIt, inner);
    }

    let mut v: Vec<Vec<f64>> = vec![b.iter().map(|bi| bi / beta).collect()];
    let mut z: Vec<Vec<f64>> = Vec::new();
    // columns of the rotated Hessenberg matrix (upper triangular part)
    let mut r: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut w = vec![0.0; n];
    let mut ax = vec![0.0; n];

    for j in 0..params.maxit {
        let mut zj = vec![0.0; n];
        inner += precond.apply_inverse(&v[j], &mut zj);
        op.apply(&zj, &mut w);
        z.push(zj);

        let mut h = vec![0.0; j + 2];
        let mut wnorm = norm(&w);
        for _pass in 0..2 {
            let before = wnorm;
            for (i, vi) in v.iter().enumerate() {
                let c = dot(&w, vi);
                h[i] += c;
                w.iter_mut().zip(vi).for_each(|(wk, vk)| *wk -= c * vk);
            }
            wnorm = norm(&w);
            if wnorm >= REORTH_RATIO * before {
                break;
            }
        }
        h[j + 1] = wnorm;

        for i in 0..j {
            let t = cs[i] * h[i] + sn[i] * h[i + 1];
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        let d = h[j].hypot(h[j + 1]);
        let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (h[j] / d, h[j + 1] / d) };
        cs.push(c);
        sn.push(s);
        h[j] = d;
        h[j + 1] = 0.0;
        g.push(-s * g[j]);
        g[j] *= c;
        h.truncate(j + 1);
        r.push(h);

        // y = R⁻¹ g, x = Z y
        let k = j + 1;
        let mut y = g[..k].to_vec();
        for i in (0..k).rev() {
            for l in i + 1..k {
                y[i] -= r[l][i] * y[l];
            }
            y[i] = if r[i][i] != 0.0 { y[i] / r[i][i] } else { 0.0 };
        }
        x.iter_mut().for_each(|xi| *xi = 0.0);
        for (zl, yl) in z.iter().zip(&y) {
            x.iter_mut().zip(zl).for_each(|(xi, zi)| *xi += yl * zi);
        }
        op.apply(&x, &mut ax);
        let res = ax
            .iter()
            .zip(b)
            .map(|(a, bi)| (bi - a) * (bi - a))
            .sum::<f64>()
            .sqrt()
            / beta;
        hist.push(res);

        if !res.is_finite() {
            return finish(x, k, hist, SolveFlag::Breakdown, inner);
        }
        if res <= params.tol {
            return finish(x, k, hist, SolveFlag::Converged, inner);
        }
        if wnorm <= f64::EPSILON * d.max(f64::MIN_POSITIVE) || wnorm == 0.0 {
            return finish(x, k, hist, SolveFlag::Breakdown, inner);
        }
        if start.elapsed().as_secs_f64() > params.time_limit {
            return finish(x, k, hist, SolveFlag::TimeLimit, inner);
        }
        if k < params.maxit {
            v.push(w.iter().map(|wi| wi / wnorm).collect());
        }
    }
    finish(x, params.maxit, hist, SolveFlag::MaxIt, inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::IdentityPreconditioner;
    use crate::sparse::{CsrMatrix, DenseMatrix};

    #[test]
    fn identity_converges_in_one_step() {
        let b = [3.0, -1.0, 2.0];
        let (x, rep) = fgmres(&CsrMatrix::identity(3), &IdentityPreconditioner(3), &b, &SolveParams::default());
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged());
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_block_system_within_three_steps() {
        let m = CsrMatrix::from_dense(
            &DenseMatrix::from_rows(&[
                vec![1.0, 1.0, 0.0],
                vec![-1.0, 0.0, -1.0],
                vec![0.0, 1.0, 0.0],
            ])
            .unwrap(),
        );
        let b = [2.0, -2.0, 1.0];
        let (x, rep) = fgmres(&m, &IdentityPreconditioner(3), &b, &SolveParams { tol: 1e-12, ..Default::default() });
        assert!(rep.converged() && rep.iterations <= 3, "{rep:?}");
        for xi in x {
            assert!((xi - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs() {
        let (x, rep) = fgmres(&CsrMatrix::identity(2), &IdentityPreconditioner(2), &[0.0, 0.0], &SolveParams::default());
        assert_eq!((x, rep.iterations, rep.flag), (vec![0.0, 0.0], 0, SolveFlag::Converged));
    }

    #[test]
    fn maxit_flag() {
        let op = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let (_, rep) = fgmres(&op, &IdentityPreconditioner(4), &[1.0; 4], &SolveParams { maxit: 2, ..Default::default() });
        assert_eq!(rep.flag, SolveFlag::MaxIt);
        assert_eq!(rep.iterations, 2);
        assert_eq!(rep.res_history.len(), 3);
    }

    #[test]
    fn time_limit_flag() {
        let op = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let (_, rep) = fgmres(
            &op,
            &IdentityPreconditioner(4),
            &[1.0; 4],
            &SolveParams { time_limit: -1.0, tol: 1e-14, maxit: 10 },
        );
        assert_eq!(rep.flag, SolveFlag::TimeLimit);
    }
}
