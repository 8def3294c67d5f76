//! The block upper-triangular preconditioner
//!
//! ```text
//!     [ A  Bᵀ       0        ]
//! 𝒫 = [ 0  αI+βBBᵀ  -Cᵀ      ]
//!     [ 0  0        αI+βCCᵀ  ]
//! ```
//!
//! and the baselines `𝒫_D1 = diag(A, αI+βBBᵀ, αI+βCCᵀ)`,
//! `𝒫_D2 = diag(A, S, K)`, `𝒫₁ = [A 0 0; B -S Cᵀ; 0 0 K]`,
//! `𝒫₂ = [A 0 0; B -S Cᵀ; 0 0 -K]` and `𝒫₃ = [A Bᵀ 0; B -S 0; 0 0 -K]`,
//! where `K = C S⁻¹ Cᵀ`.
//!
//! `𝒫` and `𝒫_D1` target the nonsymmetric form `ℬ`; the other four target
//! the symmetric form `𝒜`. Since `ℬ = J𝒜` with `J = diag(I, -I, I)`, a
//! preconditioner built for one form is used on the other as `𝒫J`, which
//! leaves the preconditioned spectrum unchanged.

mod dense;
mod schur;

pub use dense::{assemble_dense, preconditioned_dense};
pub use schur::{build_schur, SchurApprox, SchurMode, DENSE_SCHUR_CAP};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::krylov::{cg_into, ApplyStats, CgWorkspace, Preconditioner, SolveFlag};
use crate::problem::{BlockSaddleSystem, BlockVector, MonolithicForm};
use crate::sparse::{CholeskyFactor, CsrMatrix, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PreconditionerKind {
    Identity,
    PTriangular,
    PD1,
    PD2,
    P1,
    P2,
    P3,
}

impl PreconditionerKind {
    pub const ALL: [PreconditionerKind; 7] = [
        Self::Identity,
        Self::PTriangular,
        Self::PD1,
        Self::PD2,
        Self::P1,
        Self::P2,
        Self::P3,
    ];

    /// Short label used by the CLI and tables.
    pub fn label(self) -> &'static str {
        match self {
            Self::Identity => "I",
            Self::PTriangular => "P",
            Self::PD1 => "PD1",
            Self::PD2 => "PD2",
            Self::P1 => "P1",
            Self::P2 => "P2",
            Self::P3 => "P3",
        }
    }

    /// The monolithic form the preconditioner was designed for.
    pub fn native_form(self) -> MonolithicForm {
        match self {
            Self::Identity | Self::PTriangular | Self::PD1 => MonolithicForm::SemipositiveB,
            Self::PD2 | Self::P1 | Self::P2 | Self::P3 => MonolithicForm::SymmetricA,
        }
    }

    pub fn uses_alpha_beta(self) -> bool {
        matches!(self, Self::PTriangular | Self::PD1)
    }

    pub fn uses_schur(self) -> bool {
        matches!(self, Self::PD2 | Self::P1 | Self::P2 | Self::P3)
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PreconditionerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Usage(format!("unknown preconditioner '{s}' (expected I, P, PD1, PD2, P1, P2 or P3)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnerSolveMode {
    ExactCholesky,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolvePolicy {
    pub mode: InnerSolveMode,
    /// CG stops once the residual norm has dropped by this factor.
    pub cg_reduction: f64,
    pub cg_maxit: usize,
}

impl InnerSolvePolicy {
    pub fn exact() -> Self {
        Self {
            mode: InnerSolveMode::ExactCholesky,
            ..Self::cg()
        }
    }

    pub fn cg() -> Self {
        Self {
            mode: InnerSolveMode::Cg,
            cg_reduction: 1e-3,
            cg_maxit: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cg_reduction > 0.0 && self.cg_reduction < 1.0) {
            return Err(Error::Usage(format!(
                "inner CG reduction must lie in (0, 1), got {}",
                self.cg_reduction
            )));
        }
        if self.cg_maxit == 0 {
            return Err(Error::Usage("inner CG iteration cap must be positive".into()));
        }
        Ok(())
    }
}

impl Default for InnerSolvePolicy {
    fn default() -> Self {
        Self::cg()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreconditionerConfig {
    pub alpha: f64,
    pub beta: f64,
    pub inner_policy: InnerSolvePolicy,
    pub schur_mode: SchurMode,
}

impl PreconditionerConfig {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            inner_policy: InnerSolvePolicy::default(),
            schur_mode: SchurMode::DiagApprox,
        }
    }

    pub fn with_policy(mut self, policy: InnerSolvePolicy) -> Self {
        self.inner_policy = policy;
        self
    }

    pub fn with_schur(mut self, mode: SchurMode) -> Self {
        self.schur_mode = mode;
        self
    }
}

/// A solver for one SPD block.
#[derive(Debug, Clone)]
enum BlockSolver {
    Cholesky(CholeskyFactor),
    Cg {
        mat: CsrMatrix,
        reduction: f64,
        maxit: usize,
    },
}

impl BlockSolver {
    fn new(mat: CsrMatrix, name: &str, policy: &InnerSolvePolicy) -> Result<Self> {
        Ok(match policy.mode {
            InnerSolveMode::ExactCholesky => Self::Cholesky(CholeskyFactor::new(&mat, name)?),
            InnerSolveMode::Cg => Self::Cg {
                mat,
                reduction: policy.cg_reduction,
                maxit: policy.cg_maxit,
            },
        })
    }

    fn solve(&self, rhs: &[f64], out: &mut [f64]) -> ApplyStats {
        match self {
            Self::Cholesky(f) => {
                f.solve_into(rhs, out);
                ApplyStats::default()
            }
            Self::Cg {
                mat,
                reduction,
                maxit,
            } => {
                let mut ws = CgWorkspace::new(mat.nrows());
                let o = cg_into(mat, rhs, out, *reduction, *maxit, &mut ws, None);
                ApplyStats {
                    inner_iterations: o.iterations,
                    inner_unconverged: usize::from(o.flag != SolveFlag::Converged),
                }
            }
        }
    }
}

/// Factors a Schur-type block, mapping a failed factorization to a rank
/// error (the block is singular when `B` or `C` lacks full row rank).
fn factor_rank_checked(mat: &CsrMatrix, name: &str) -> Result<CholeskyFactor> {
    match CholeskyFactor::new(mat, name) {
        Ok(f) => Ok(f),
        Err(Error::NotPositiveDefinite { pivot, .. }) => Err(Error::Rank(format!(
            "{name} is singular (pivot {pivot}); a coupling block is not of full row rank"
        ))),
        Err(e) => Err(e),
    }
}

/// A built preconditioner. Immutable after construction; applications are
/// reentrant.
#[derive(Debug, Clone)]
pub struct PreconditionerInstance {
    kind: PreconditionerKind,
    config: PreconditionerConfig,
    n: usize,
    m: usize,
    l: usize,
    outer_form: MonolithicForm,
    b: CsrMatrix,
    c: CsrMatrix,
    a_solver: Option<BlockSolver>,
    /// `αI + βBBᵀ` for `𝒫`, `𝒫_D1`; `S` for the Schur-based kinds.
    mid_solver: Option<BlockSolver>,
    /// `αI + βCCᵀ` or `K = C S⁻¹ Cᵀ`.
    last_solver: Option<BlockSolver>,
    /// `S + B A⁻¹ Bᵀ`, the Schur complement of the leading 2x2 block of `𝒫₃`.
    p3_schur: Option<BlockSolver>,
    setup_seconds: f64,
}

/// Prepares the blocks `kind` needs. With the Cholesky policy every block
/// is factored here; with the CG policy only operators are formed, except
/// that `S` is still factored when `K = C S⁻¹ Cᵀ` must be formed (order at
/// most [`DENSE_SCHUR_CAP`]).
pub fn build_preconditioner(
    sys: &BlockSaddleSystem,
    kind: PreconditionerKind,
    config: &PreconditionerConfig,
) -> Result<PreconditionerInstance> {
    let start = Instant::now();
    config.inner_policy.validate()?;
    let policy = &config.inner_policy;
    if kind.uses_alpha_beta() && !(config.alpha > 0.0 && config.beta > 0.0) {
        return Err(Error::Usage(format!(
            "alpha and beta must be positive, got alpha={}, beta={}",
            config.alpha, config.beta
        )));
    }
    let mut inst = PreconditionerInstance {
        kind,
        config: config.clone(),
        n: sys.n(),
        m: sys.m(),
        l: sys.l(),
        outer_form: kind.native_form(),
        b: sys.b().clone(),
        c: sys.c().clone(),
        a_solver: None,
        mid_solver: None,
        last_solver: None,
        p3_schur: None,
        setup_seconds: 0.0,
    };
    if kind == PreconditionerKind::Identity {
        return Ok(inst);
    }
    inst.a_solver = Some(BlockSolver::new(sys.a().clone(), "A", policy)?);

    match kind {
        PreconditionerKind::Identity => unreachable!(),
        PreconditionerKind::PTriangular | PreconditionerKind::PD1 => {
            let (a, bt) = (config.alpha, config.beta);
            let bb = sys.b().gram().shifted(a, bt)?;
            let cc = sys.c().gram().shifted(a, bt)?;
            inst.mid_solver = Some(BlockSolver::new(bb, "alpha*I + beta*B*B^T", policy)?);
            inst.last_solver = Some(BlockSolver::new(cc, "alpha*I + beta*C*C^T", policy)?);
        }
        PreconditionerKind::PD2 | PreconditionerKind::P1 | PreconditionerKind::P2 | PreconditionerKind::P3 => {
            if sys.l() > DENSE_SCHUR_CAP {
                return Err(Error::Capacity(format!(
                    "K = C S⁻¹ Cᵀ of order {} exceeds cap {DENSE_SCHUR_CAP}",
                    sys.l()
                )));
            }
            // exact Schur mode and P3 both need a factorization of A
            let need_fa = config.schur_mode == SchurMode::Exact || kind == PreconditionerKind::P3;
            let fa = match (&inst.a_solver, need_fa) {
                (Some(BlockSolver::Cholesky(f)), true) => Some(f.clone()),
                (_, true) => Some(CholeskyFactor::new(sys.a(), "A")?),
                _ => None,
            };
            let (s, bab) = match config.schur_mode {
                SchurMode::DiagApprox => {
                    let s = schur::diag_approx(sys)?;
                    let bab = match (&fa, kind) {
                        (Some(f), PreconditionerKind::P3) => Some(schur::exact_schur_dense(sys.b(), f)?),
                        _ => None,
                    };
                    (s, bab)
                }
                SchurMode::Exact => {
                    let d = schur::exact_schur_dense(sys.b(), fa.as_ref().unwrap())?;
                    (CsrMatrix::from_dense(&d), Some(d))
                }
            };
            let fs = factor_rank_checked(&s, "S")?;
            let k = form_k(sys.c(), &fs)?;
            let fk = factor_rank_checked(&k, "C S^-1 C^T")?;
            if kind == PreconditionerKind::P3 {
                let s2 = match config.schur_mode {
                    SchurMode::Exact => s.scale(2.0),
                    SchurMode::DiagApprox => {
                        let d = bab.expect("formed above").add_scaled(1.0, &s.to_dense(), 1.0);
                        let mut d = d;
                        schur::symmetrize(&mut d);
                        CsrMatrix::from_dense(&d)
                    }
                };
                inst.p3_schur = Some(match policy.mode {
                    InnerSolveMode::ExactCholesky => BlockSolver::Cholesky(factor_rank_checked(&s2, "S + B A^-1 B^T")?),
                    InnerSolveMode::Cg => BlockSolver::new(s2, "S + B A^-1 B^T", policy)?,
                });
            }
            inst.mid_solver = Some(match policy.mode {
                InnerSolveMode::ExactCholesky => BlockSolver::Cholesky(fs),
                InnerSolveMode::Cg => BlockSolver::new(s, "S", policy)?,
            });
            inst.last_solver = Some(match policy.mode {
                InnerSolveMode::ExactCholesky => BlockSolver::Cholesky(fk),
                InnerSolveMode::Cg => BlockSolver::new(k, "C S^-1 C^T", policy)?,
            });
        }
    }
    inst.setup_seconds = start.elapsed().as_secs_f64();
    Ok(inst)
}

/// `K = C S⁻¹ Cᵀ`, formed densely.
fn form_k(c: &CsrMatrix, fs: &CholeskyFactor) -> Result<CsrMatrix> {
    let l = c.nrows();
    let mut k = DenseMatrix::zeros(l, l);
    let mut col = vec![0.0; c.ncols()];
    let mut u = vec![0.0; c.ncols()];
    let mut cu = vec![0.0; l];
    for j in 0..l {
        col.iter_mut().for_each(|v| *v = 0.0);
        let (idx, vals) = c.row(j);
        for (&i, &v) in idx.iter().zip(vals) {
            col[i] = v;
        }
        fs.solve_into(&col, &mut u);
        c.spmv_into(&u, &mut cu);
        k.set_column(j, &cu);
    }
    schur::symmetrize(&mut k);
    Ok(CsrMatrix::from_dense(&k))
}

impl PreconditionerInstance {
    pub fn kind(&self) -> PreconditionerKind {
        self.kind
    }

    pub fn config(&self) -> &PreconditionerConfig {
        &self.config
    }

    pub fn block_sizes(&self) -> (usize, usize, usize) {
        (self.n, self.m, self.l)
    }

    pub fn setup_seconds(&self) -> f64 {
        self.setup_seconds
    }

    pub fn outer_form(&self) -> MonolithicForm {
        self.outer_form
    }

    /// Selects the form of the operator the preconditioner will be paired
    /// with; see the module documentation.
    pub fn with_outer_form(mut self, form: MonolithicForm) -> Self {
        self.outer_form = form;
        self
    }

    /// `out = 𝒫⁻¹ w` for the kind's own (native-form) matrix.
    pub fn apply_native(&self, w: &[f64], out: &mut [f64]) -> ApplyStats {
        let (n, m) = (self.n, self.m);
        assert_eq!(w.len(), self.n + self.m + self.l, "preconditioner input length");
        assert_eq!(out.len(), w.len(), "preconditioner output length");
        let (w1, rest) = w.split_at(n);
        let (w2, w3) = rest.split_at(m);
        let (v1, rest) = out.split_at_mut(n);
        let (v2, v3) = rest.split_at_mut(m);
        let mut st = ApplyStats::default();
        let solve = |s: &Option<BlockSolver>, r: &[f64], o: &mut [f64]| s.as_ref().expect("block prepared").solve(r, o);
        match self.kind {
            PreconditionerKind::Identity => {
                out.copy_from_slice(w);
            }
            PreconditionerKind::PTriangular => {
                st += solve(&self.last_solver, w3, v3);
                let mut r2 = w2.to_vec();
                let ct = self.c.spmv_transpose(v3).expect("dims");
                r2.iter_mut().zip(&ct).for_each(|(a, b)| *a += b);
                st += solve(&self.mid_solver, &r2, v2);
                let mut r1 = w1.to_vec();
                let bt = self.b.spmv_transpose(v2).expect("dims");
                r1.iter_mut().zip(&bt).for_each(|(a, b)| *a -= b);
                st += solve(&self.a_solver, &r1, v1);
            }
            PreconditionerKind::PD1 | PreconditionerKind::PD2 => {
                st += solve(&self.a_solver, w1, v1);
                st += solve(&self.mid_solver, w2, v2);
                st += solve(&self.last_solver, w3, v3);
            }
            PreconditionerKind::P1 | PreconditionerKind::P2 => {
                st += solve(&self.a_solver, w1, v1);
                st += solve(&self.last_solver, w3, v3);
                if self.kind == PreconditionerKind::P2 {
                    v3.iter_mut().for_each(|v| *v = -*v);
                }
                // -S v₂ = w₂ - B v₁ - Cᵀ v₃
                let mut r2 = self.b.spmv(v1).expect("dims");
                let ct = self.c.spmv_transpose(v3).expect("dims");
                r2.iter_mut()
                    .zip(ct.iter().zip(w2))
                    .for_each(|(a, (c, w))| *a += c - w);
                st += solve(&self.mid_solver, &r2, v2);
            }
            PreconditionerKind::P3 => {
                st += solve(&self.last_solver, w3, v3);
                v3.iter_mut().for_each(|v| *v = -*v);
                // (S + B A⁻¹ Bᵀ) v₂ = B A⁻¹ w₁ - w₂, then A v₁ = w₁ - Bᵀ v₂
                let mut t = vec![0.0; n];
                st += solve(&self.a_solver, w1, &mut t);
                let mut r2 = self.b.spmv(&t).expect("dims");
                r2.iter_mut().zip(w2).for_each(|(a, w)| *a -= w);
                st += solve(&self.p3_schur, &r2, v2);
                let mut r1 = w1.to_vec();
                let bt = self.b.spmv_transpose(v2).expect("dims");
                r1.iter_mut().zip(&bt).for_each(|(a, b)| *a -= b);
                st += solve(&self.a_solver, &r1, v1);
            }
        }
        st
    }

    /// Block-vector form of [`Self::apply_native`].
    pub fn apply_block(&self, w: &BlockVector) -> Result<(BlockVector, ApplyStats)> {
        let flat = w.flatten();
        crate::error::check_len("preconditioner input", self.n + self.m + self.l, flat.len())?;
        let mut out = vec![0.0; flat.len()];
        let st = self.apply_native(&flat, &mut out);
        Ok((BlockVector::unflatten(&out, self.n, self.m, self.l)?, st))
    }
}

impl Preconditioner for PreconditionerInstance {
    fn dim(&self) -> usize {
        self.n + self.m + self.l
    }

    fn apply_inverse(&self, w: &[f64], out: &mut [f64]) -> ApplyStats {
        if self.outer_form == self.kind.native_form() || self.kind == PreconditionerKind::Identity {
            self.apply_native(w, out)
        } else {
            let mut jw = w.to_vec();
            jw[self.n..self.n + self.m].iter_mut().for_each(|v| *v = -*v);
            self.apply_native(&jw, out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_sys(a: f64) -> BlockSaddleSystem {
        BlockSaddleSystem::new(
            CsrMatrix::from_diagonal(&[a]),
            CsrMatrix::identity(1),
            CsrMatrix::identity(1),
        )
        .unwrap()
    }

    fn apply(kind: PreconditionerKind, w: [f64; 3]) -> Vec<f64> {
        let cfg = PreconditionerConfig::new(1.0, 1.0).with_policy(InnerSolvePolicy::exact());
        let p = build_preconditioner(&scalar_sys(2.0), kind, &cfg).unwrap();
        let mut out = vec![0.0; 3];
        p.apply_native(&w, &mut out);
        out
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14)
    }

    #[test]
    fn scalar_triangular_back_substitution() {
        let w = [1.0, 2.0, 3.0];
        let v3 = w[2] / 2.0;
        let v2 = (w[1] + v3) / 2.0;
        let v1 = (w[0] - v2) / 2.0;
        assert!(close(&apply(PreconditionerKind::PTriangular, w), &[v1, v2, v3]));
    }

    #[test]
    fn scalar_block_diagonals() {
        let w = [1.0, 2.0, 3.0];
        assert!(close(&apply(PreconditionerKind::PD1, w), &[0.5, 1.0, 1.5]));
        // S = 1/2, K = 2
        assert!(close(&apply(PreconditionerKind::PD2, w), &[0.5, 4.0, 1.5]));
    }

    #[test]
    fn scalar_p1() {
        let w = [1.0, 2.0, 3.0];
        let v2 = -2.0 * (w[1] - w[0] / 2.0 - w[2] / 2.0);
        assert!(close(&apply(PreconditionerKind::P1, w), &[0.5, v2, 1.5]));
    }

    #[test]
    fn identity_is_identity() {
        assert_eq!(apply(PreconditionerKind::Identity, [1.0, -2.0, 5.0]), vec![1.0, -2.0, 5.0]);
    }

    #[test]
    fn kind_labels_roundtrip() {
        for k in PreconditionerKind::ALL {
            assert_eq!(k.label().parse::<PreconditionerKind>().unwrap(), k);
        }
        assert!("Q".parse::<PreconditionerKind>().is_err());
    }

    #[test]
    fn policy_validation() {
        let mut p = InnerSolvePolicy::cg();
        p.cg_reduction = 1.0;
        assert!(p.validate().is_err());
        p.cg_reduction = 0.5;
        p.cg_maxit = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn nonpositive_parameters_rejected() {
        let cfg = PreconditionerConfig::new(0.0, 1.0);
        assert!(matches!(
            build_preconditioner(&scalar_sys(2.0), PreconditionerKind::PTriangular, &cfg),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn indefinite_a_names_block() {
        let cfg = PreconditionerConfig::new(1.0, 1.0).with_policy(InnerSolvePolicy::exact());
        match build_preconditioner(&scalar_sys(-1.0), PreconditionerKind::PD1, &cfg) {
            Err(Error::NotPositiveDefinite { block, .. }) => assert_eq!(block, "A"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
