use std::time::Instant;

use super::{dot, LinearOperator, SolveFlag, SolveReport};

/// Scratch vectors for repeated CG solves of one dimension.
#[derive(Debug, Clone)]
pub struct CgWorkspace {
    r: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl CgWorkspace {
    pub fn new(n: usize) -> Self {
        Self {
            r: vec![0.0; n],
            p: vec![0.0; n],
            q: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub flag: SolveFlag,
}

/// Conjugate gradients from a zero initial guess, stopping once
/// `‖r_k‖ <= reduction·‖r_0‖` or after `maxit` iterations. Writes the
/// iterate into `x`. `history`, when given, receives `‖r_k‖/‖r_0‖`
/// starting with the initial 1.
pub fn cg_into(
    op: &impl LinearOperator,
    rhs: &[f64],
    x: &mut [f64],
    reduction: f64,
    maxit: usize,
    ws: &mut CgWorkspace,
    mut history: Option<&mut Vec<f64>>,
) -> CgOutcome {
    let CgWorkspace { r, p, q } = ws;
    x.iter_mut().for_each(|v| *v = 0.0);
    r.copy_from_slice(rhs);
    let mut rr = dot(r, r);
    let r0 = rr.sqrt();
    if let Some(h) = history.as_deref_mut() {
        h.push(if r0 == 0.0 { 0.0 } else { 1.0 });
    }
    if r0 == 0.0 {
        return CgOutcome {
            iterations: 0,
            flag: SolveFlag::Converged,
        };
    }
    if !r0.is_finite() {
        return CgOutcome {
            iterations: 0,
            flag: SolveFlag::Breakdown,
        };
    }
    let target = reduction * r0;
    p.copy_from_slice(r);
    for k in 1..=maxit {
        op.apply(p, q);
        let pq = dot(p, q);
        if !(pq > 0.0) || !pq.is_finite() {
            return CgOutcome {
                iterations: k,
                flag: SolveFlag::Breakdown,
            };
        }
        let alpha = rr / pq;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rr_new = dot(r, r);
        if let Some(h) = history.as_deref_mut() {
            h.push(rr_new.sqrt() / r0);
        }
        if !rr_new.is_finite() {
            return CgOutcome {
                iterations: k,
                flag: SolveFlag::Breakdown,
            };
        }
        if rr_new.sqrt() <= target {
            return CgOutcome {
                iterations: k,
                flag: SolveFlag::Converged,
            };
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
    }
    CgOutcome {
        iterations: maxit,
        flag: SolveFlag::MaxIt,
    }
}

/// Convenience wrapper around [`cg_into`] returning a full report. The
/// residual history is relative to `‖rhs‖`, so `final_res <= reduction`
/// on convergence.
pub fn cg(op: &impl LinearOperator, rhs: &[f64], reduction: f64, maxit: usize) -> (Vec<f64>, SolveReport) {
    let start = Instant::now();
    let n = rhs.len();
    assert_eq!(op.dim(), n, "cg: operator and rhs dimensions differ");
    let mut x = vec![0.0; n];
    let mut ws = CgWorkspace::new(n);
    let mut hist = Vec::new();
    let out = cg_into(op, rhs, &mut x, reduction, maxit, &mut ws, Some(&mut hist));
    let final_res = *hist.last().unwrap();
    (
        x,
        SolveReport {
            iterations: out.iterations,
            res_history: hist,
            final_res,
            err: None,
            err_history: Vec::new(),
            wall_seconds: start.elapsed().as_secs_f64(),
            flag: out.flag,
            inner: Default::default(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrMatrix;

    #[test]
    fn identity_one_step() {
        let (x, rep) = cg(&CsrMatrix::identity(4), &[1.0, -2.0, 3.0, 0.5], 1e-3, 10);
        assert_eq!(rep.iterations, 1);
        assert_eq!(x, vec![1.0, -2.0, 3.0, 0.5]);
        assert!(rep.converged());
    }

    #[test]
    fn diagonal_finite_termination() {
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        let op = CsrMatrix::from_diagonal(&d);
        let (x, rep) = cg(&op, &[1.0; 10], 1e-12, 100);
        assert!(rep.iterations <= 10);
        for (xi, di) in x.iter().zip(&d) {
            assert!((xi - 1.0 / di).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_and_maxit() {
        let op = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let (x, rep) = cg(&op, &[0.0; 3], 1e-3, 5);
        assert_eq!((x, rep.iterations, rep.flag), (vec![0.0; 3], 0, SolveFlag::Converged));
        let (_, rep) = cg(&op, &[1.0; 3], 1e-14, 1);
        assert_eq!(rep.flag, SolveFlag::MaxIt);
    }

    #[test]
    fn indefinite_breaks_down() {
        let op = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        let (_, rep) = cg(&op, &[1.0, 1.0], 1e-3, 5);
        assert_eq!(rep.flag, SolveFlag::Breakdown);
    }
}
