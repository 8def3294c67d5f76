//! Outer and inner iterative solvers.

mod cg;
mod fgmres;
mod stationary;

pub use cg::{cg, cg_into, CgOutcome, CgWorkspace};
pub use fgmres::fgmres;
pub use stationary::{stationary_iterate, stationary_iterate_with};

use crate::sparse::CsrMatrix;

/// A square linear map applied into a caller-provided buffer.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows(), self.ncols());
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

/// Inner-solve bookkeeping returned by one preconditioner application.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ApplyStats {
    pub inner_iterations: usize,
    /// Inner solves that stopped at their iteration cap.
    pub inner_unconverged: usize,
}

impl std::ops::AddAssign for ApplyStats {
    fn add_assign(&mut self, o: Self) {
        self.inner_iterations += o.inner_iterations;
        self.inner_unconverged += o.inner_unconverged;
    }
}

/// Approximate inverse `out ≈ M⁻¹ w`. May vary between calls (inner
/// iterative solves), which flexible GMRES tolerates.
pub trait Preconditioner {
    fn dim(&self) -> usize;
    fn apply_inverse(&self, w: &[f64], out: &mut [f64]) -> ApplyStats;
}

/// `M = I`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityPreconditioner(pub usize);

impl Preconditioner for IdentityPreconditioner {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_inverse(&self, w: &[f64], out: &mut [f64]) -> ApplyStats {
        out.copy_from_slice(w);
        ApplyStats::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveFlag {
    Converged,
    MaxIt,
    TimeLimit,
    Breakdown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveParams {
    pub tol: f64,
    pub maxit: usize,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            maxit: 1000,
            time_limit: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residuals `‖b - Ax‖/‖b‖`; entry 0 is the initial guess.
    pub res_history: Vec<f64>,
    pub final_res: f64,
    /// Relative error against a known solution, when one was supplied.
    pub err: Option<f64>,
    /// Relative errors per iteration (stationary iteration only).
    pub err_history: Vec<f64>,
    pub wall_seconds: f64,
    pub flag: SolveFlag,
    pub inner: ApplyStats,
}

impl SolveReport {
    /// Sets `err = ‖x - exact‖/‖exact‖`.
    pub fn set_error(&mut self, x: &[f64], exact: &[f64]) {
        self.err = Some(relative_error(x, exact));
    }

    pub fn converged(&self) -> bool {
        self.flag == SolveFlag::Converged
    }
}

pub fn relative_error(x: &[f64], exact: &[f64]) -> f64 {
    let d: f64 = x.iter().zip(exact).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let n = norm(exact);
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `‖b - op·x‖ / ‖b‖` (or the absolute norm when `b = 0`).
pub fn relative_residual(op: &impl LinearOperator, x: &[f64], b: &[f64]) -> f64 {
    let mut r = vec![0.0; b.len()];
    op.apply(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}
