use std::fs;
use std::path::Path;

use saddle_core::analysis::{beta_rule, BetaRule};
use saddle_core::krylov::{fgmres, relative_error, relative_residual, SolveFlag, SolveParams};
use saddle_core::precond::{build_preconditioner, PreconditionerConfig, PreconditionerKind, DENSE_SCHUR_CAP};
use saddle_core::problem::{build_example1, build_example2, load_kkt_blocks, BlockSaddleSystem, BlockVector, MonolithicForm};
use saddle_core::sparse::mm::{read_vector_market, write_vector_market};
use saddle_core::Error;

use crate::cli::{BenchmarkConfig, KktFiles, KktRhs, ProblemKind};

/// Terminal state of one table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFlag {
    Converged,
    TimeLimit,
    MaxIt,
    /// The outer iteration stalled before reaching the tolerance.
    Breakdown,
    /// The preconditioner could not be formed: a block is not SPD or a
    /// coupling block is rank deficient.
    Rejected,
    /// Not attempted because a dense block would exceed its size cap.
    Skipped,
    /// I/O or other failure; the row carries a message.
    Failed,
}

impl RowFlag {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::Converged => "",
            Self::TimeLimit => "†",
            Self::MaxIt => "‡",
            Self::Breakdown => "*",
            Self::Rejected => "§",
            Self::Skipped => "-",
            Self::Failed => "E",
        }
    }

    fn from_solve(flag: SolveFlag) -> Self {
        match flag {
            SolveFlag::Converged => Self::Converged,
            SolveFlag::MaxIt => Self::MaxIt,
            SolveFlag::TimeLimit => Self::TimeLimit,
            SolveFlag::Breakdown => Self::Breakdown,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub problem: String,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub precond: PreconditionerKind,
    pub iterations: Option<usize>,
    /// Wall-clock seconds spent in FGMRES.
    pub cpu_seconds: Option<f64>,
    pub setup_seconds: Option<f64>,
    /// `‖b - 𝒜x‖/‖b‖`, recomputed from the returned solution.
    pub res: Option<f64>,
    /// `‖x - x*‖/‖x*‖`; absent when the exact solution is unknown.
    pub err: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub flag: RowFlag,
    pub note: Option<String>,
}

impl BenchmarkRow {
    fn bare(problem: &str, dims: (usize, usize, usize), precond: PreconditionerKind, flag: RowFlag) -> Self {
        Self {
            problem: problem.to_string(),
            n: dims.0,
            m: dims.1,
            l: dims.2,
            precond,
            iterations: None,
            cpu_seconds: None,
            setup_seconds: None,
            res: None,
            err: None,
            alpha: None,
            beta: None,
            flag,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

struct Instance {
    label: String,
    sys: BlockSaddleSystem,
    /// All-ones exact solution when known.
    exact: Option<Vec<f64>>,
}

fn load_instance(cfg: &BenchmarkConfig, size: Option<usize>, kkt: Option<&KktFiles>) -> Result<Instance, Error> {
    let form = MonolithicForm::SemipositiveB;
    match (cfg.problem, size, kkt) {
        (ProblemKind::Example1 | ProblemKind::Example2, Some(p), _) => {
            let sys = if cfg.problem == ProblemKind::Example1 {
                build_example1(p)?
            } else {
                build_example2(p)?
            };
            let sys = sys.rhs_for_all_ones(form);
            Ok(Instance {
                label: cfg.problem.label().to_string(),
                exact: Some(vec![1.0; sys.dim()]),
                sys,
            })
        }
        (ProblemKind::Kkt, _, Some(files)) => {
            let (sys, _) = load_kkt_blocks(&files.a, &files.b, &files.c)?;
            let stem = files.a.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let label = format!("kkt:{stem}");
            match &files.rhs {
                KktRhs::AllOnes => {
                    let sys = sys.rhs_for_all_ones(form);
                    Ok(Instance {
                        label,
                        exact: Some(vec![1.0; sys.dim()]),
                        sys,
                    })
                }
                KktRhs::File(path) => {
                    let v = read_vector_market(path)?;
                    let (n, m, l) = (sys.n(), sys.m(), sys.l());
                    let rhs = BlockVector::unflatten(&v, n, m, l)?;
                    Ok(Instance {
                        label,
                        exact: None,
                        sys: sys.with_rhs(rhs, MonolithicForm::SymmetricA)?,
                    })
                }
            }
        }
        _ => Err(Error::Usage("configuration names no problem instance".into())),
    }
}

/// Whether `kind` would need a dense block beyond its cap for this system.
fn exceeds_caps(kind: PreconditionerKind, sys: &BlockSaddleSystem, cfg: &PreconditionerConfig) -> Option<String> {
    if !kind.uses_schur() {
        return None;
    }
    if sys.l() > DENSE_SCHUR_CAP {
        return Some(format!("K = C S^-1 C^T would be dense of order {} > {DENSE_SCHUR_CAP}", sys.l()));
    }
    let needs_dense_s = cfg.schur_mode == saddle_core::precond::SchurMode::Exact || kind == PreconditionerKind::P3;
    if needs_dense_s && sys.m() > DENSE_SCHUR_CAP {
        return Some(format!("dense Schur complement of order {} > {DENSE_SCHUR_CAP}", sys.m()));
    }
    None
}

fn solution_path(dir: &Path, label: &str, size: Option<usize>, kind: PreconditionerKind) -> std::path::PathBuf {
    let safe: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    let name = match size {
        Some(p) => format!("{safe}_p{p}_{}.mtx", kind.label()),
        None => format!("{safe}_{}.mtx", kind.label()),
    };
    dir.join(name)
}

/// Runs every (size, preconditioner) pair of `cfg` in order. Failures are
/// confined to the rows they affect.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Vec<BenchmarkRow> {
    let mut rows = Vec::new();
    let targets: Vec<(Option<usize>, Option<&KktFiles>)> = match &cfg.kkt {
        Some(k) => vec![(None, Some(k))],
        None => cfg.sizes.iter().map(|&p| (Some(p), None)).collect(),
    };
    let form = MonolithicForm::SemipositiveB;
    let params = SolveParams {
        tol: cfg.tol,
        maxit: cfg.maxit,
        time_limit: cfg.time_limit_s,
    };
    if let Some(dir) = &cfg.save_solutions {
        if let Err(e) = fs::create_dir_all(dir) {
            for _ in &targets {
                for &k in &cfg.preconditioners {
                    rows.push(
                        BenchmarkRow::bare(cfg.problem.label(), (0, 0, 0), k, RowFlag::Failed)
                            .with_note(format!("cannot create {}: {e}", dir.display())),
                    );
                }
            }
            return rows;
        }
    }

    for (size, kkt) in targets {
        let inst = match load_instance(cfg, size, kkt) {
            Ok(i) => i,
            Err(e) => {
                for &k in &cfg.preconditioners {
                    rows.push(
                        BenchmarkRow::bare(cfg.problem.label(), (0, 0, 0), k, RowFlag::Failed).with_note(e.to_string()),
                    );
                }
                continue;
            }
        };
        let sys = &inst.sys;
        let dims = (sys.n(), sys.m(), sys.l());
        let op = sys.assemble(form);
        let b = sys.rhs_vector(form);
        let op_a = sys.assemble(MonolithicForm::SymmetricA);
        let b_a = sys.rhs_vector(MonolithicForm::SymmetricA);

        // β once per instance, shared by every kind that uses it
        let needs_beta = cfg.preconditioners.iter().any(|k| k.uses_alpha_beta());
        let beta = if needs_beta {
            Some(beta_rule(sys, cfg.alpha, cfg.beta_rule).map(|s| s.beta))
        } else {
            None
        };

        for &kind in &cfg.preconditioners {
            let mut row = BenchmarkRow::bare(&inst.label, dims, kind, RowFlag::Failed);
            let (alpha, beta) = if kind.uses_alpha_beta() {
                match beta.as_ref().expect("computed when needed") {
                    Ok(b) => (cfg.alpha, *b),
                    Err(e) => {
                        rows.push(row.with_note(format!("beta rule failed: {e}")));
                        continue;
                    }
                }
            } else {
                (cfg.alpha, f64::NAN)
            };
            if kind.uses_alpha_beta() {
                row.alpha = Some(alpha);
                row.beta = Some(beta);
            }
            let pcfg = PreconditionerConfig::new(alpha, if kind.uses_alpha_beta() { beta } else { 1.0 })
                .with_policy(cfg.inner_policy);
            if let Some(reason) = exceeds_caps(kind, sys, &pcfg) {
                row.flag = RowFlag::Skipped;
                rows.push(row.with_note(reason));
                continue;
            }
            let pre = match build_preconditioner(sys, kind, &pcfg) {
                Ok(p) => p.with_outer_form(form),
                Err(e @ (Error::Rank(_) | Error::NotPositiveDefinite { .. })) => {
                    row.flag = RowFlag::Rejected;
                    rows.push(row.with_note(e.to_string()));
                    continue;
                }
                Err(e @ Error::Capacity(_)) => {
                    row.flag = RowFlag::Skipped;
                    rows.push(row.with_note(e.to_string()));
                    continue;
                }
                Err(e) => {
                    rows.push(row.with_note(e.to_string()));
                    continue;
                }
            };
            let (x, rep) = fgmres(&op, &pre, &b, &params);
            row.setup_seconds = Some(pre.setup_seconds());
            row.iterations = Some(rep.iterations);
            row.cpu_seconds = Some(rep.wall_seconds);
            row.flag = RowFlag::from_solve(rep.flag);

            // independent check against the symmetric form
            let res = relative_residual(&op_a, &x, &b_a);
            row.res = Some(res);
            row.err = inst.exact.as_ref().map(|e| relative_error(&x, e));
            if row.flag == RowFlag::Converged && (res.is_nan() || res > cfg.tol) {
                row.flag = RowFlag::Failed;
                row.note = Some(format!(
                    "solver reported convergence but recomputed Res = {res:.3e} exceeds {:.1e}",
                    cfg.tol
                ));
            }
            if let Some(dir) = &cfg.save_solutions {
                let path = solution_path(dir, &inst.label, size, kind);
                if let Err(e) = write_vector_market(&path, &x) {
                    row.flag = RowFlag::Failed;
                    row.note = Some(format!("cannot save solution: {e}"));
                }
            }
            rows.push(row);
        }
    }
    rows
}

/// `β` for one candidate `α` at one size.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaEntry {
    pub problem: String,
    pub p: usize,
    pub alpha: f64,
    pub norm_b: f64,
    pub norm_c: f64,
    pub beta: f64,
    pub target: Option<f64>,
    pub matches: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaReport {
    pub rule: BetaRule,
    pub entries: Vec<BetaEntry>,
    /// Candidates whose `β` matched every target; empty without targets.
    pub matching_alphas: Vec<f64>,
}

/// Evaluates the β rule for every candidate `α` and size. Norms are
/// estimated once per size.
pub fn beta_table(cfg: &BenchmarkConfig) -> Result<BetaReport, Error> {
    let req = cfg
        .beta_table
        .as_ref()
        .ok_or_else(|| Error::Usage("no beta table requested".into()))?;
    let mut entries = Vec::new();
    for (idx, &p) in cfg.sizes.iter().enumerate() {
        let sys = match cfg.problem {
            ProblemKind::Example1 => build_example1(p)?,
            ProblemKind::Example2 => build_example2(p)?,
            ProblemKind::Kkt => return Err(Error::Usage("beta table needs a synthetic family".into())),
        };
        let base = beta_rule(&sys, 1.0, cfg.beta_rule)?;
        for &alpha in &req.alphas {
            let beta = match cfg.beta_rule {
                BetaRule::Manual(v) => v,
                _ => base.beta * alpha,
            };
            let target = req.targets.get(idx).copied();
            entries.push(BetaEntry {
                problem: cfg.problem.label().to_string(),
                p,
                alpha,
                norm_b: base.norm_b,
                norm_c: base.norm_c,
                beta,
                target,
                matches: target.map(|t| (beta - t).abs() <= req.tolerance),
            });
        }
    }
    let matching_alphas = if req.targets.is_empty() {
        Vec::new()
    } else {
        req.alphas
            .iter()
            .copied()
            .filter(|a| entries.iter().filter(|e| e.alpha == *a).all(|e| e.matches == Some(true)))
            .collect()
    };
    Ok(BetaReport {
        rule: cfg.beta_rule,
        entries,
        matching_alphas,
    })
}
