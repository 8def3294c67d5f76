//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line on stderr (bypassing the test
//! harness capture) and then asserts the verdict.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saddle_bench::{beta_table, run_benchmark, BenchmarkConfig, BetaTableRequest, ProblemKind, RowFlag};
use saddle_core::analysis::{
    alpha_tilde, beta_rule, default_alpha_grid, default_beta_multipliers, extremal_stats, iteration_matrix_dense,
    lemma1_root_test, preconditioned_spectrum_extended, q_polynomial, spectral_report, theorem1_sweep, BetaRule,
    OperatorTag, RootTestInput,
};
use saddle_core::krylov::stationary_iterate_with;
use saddle_core::precond::{build_preconditioner, InnerSolvePolicy, PreconditionerConfig, PreconditionerKind};
use saddle_core::problem::{build_example1, build_example2, MonolithicForm};
use saddle_core::sparse::mm::read_vector_market;

fn verdict(n: u32, pass: bool, started: Instant, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {n}: {tag} ({:.1}s) {detail}\n", started.elapsed().as_secs_f64());
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn criterion_1_beta_rule_example2() {
    let t0 = Instant::now();
    let targets = [(16, 0.36), (32, 0.35), (64, 0.35)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, want) in targets {
        let sys = build_example2(p).unwrap();
        let sel = beta_rule(&sys, 0.5, BetaRule::Averaged).unwrap();
        pass &= (sel.beta - want).abs() <= 0.005;
        parts.push(format!("p={p} beta={:.4} (target {want})", sel.beta));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    pass &= elapsed < 10.0;
    verdict(1, pass, t0, &parts.join(", "));
}

#[test]
fn criterion_2_beta_rule_example1_alpha_resolution() {
    let t0 = Instant::now();
    let mut cfg = BenchmarkConfig::new(ProblemKind::Example1, vec![16, 32, 64], vec![]);
    cfg.beta_table = Some(BetaTableRequest {
        alphas: vec![5e-2, 1e-2],
        targets: vec![0.94, 1.83, 3.60],
        tolerance: 0.005,
    });
    let report = beta_table(&cfg).unwrap();
    let parts: Vec<String> = report
        .entries
        .iter()
        .map(|e| format!("p={} alpha={:.0e} beta={:.3e}", e.p, e.alpha, e.beta))
        .collect();
    let pass = report.matching_alphas.len() == 1 && t0.elapsed().as_secs_f64() < 30.0;
    let detail = format!("matching alphas {:?}; {}", report.matching_alphas, parts.join(", "));
    verdict(2, pass, t0, &detail);
}

fn within(eigs: &[Complex64], set: &[f64], tol: f64) -> (bool, f64) {
    let worst = eigs
        .iter()
        .map(|z| set.iter().map(|&s| (z - s).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    (worst <= tol, worst)
}

#[test]
fn criterion_3_eigenvalue_clustering() {
    let t0 = Instant::now();
    let sys = build_example1(3).unwrap();
    let cfg = PreconditionerConfig::new(1.0, 1.0).with_policy(InnerSolvePolicy::exact());
    let spec = |k| preconditioned_spectrum_extended(&sys, k, &cfg, MonolithicForm::SymmetricA).unwrap();
    let (ok1, w1) = within(&spec(PreconditionerKind::P1), &[1.0], 1e-6);
    let (ok2, w2) = within(&spec(PreconditionerKind::P2), &[-0.5, 0.5, 1.0], 1e-6);
    let (ok3, w3) = within(&spec(PreconditionerKind::P3), &[-1.0, 1.0], 1e-6);
    let pass = ok1 && ok2 && ok3 && t0.elapsed().as_secs_f64() < 10.0;
    let detail = format!(
        "max distance to target set: P1 {w1:.1e} ({}), P2 {w2:.1e} ({}), P3 {w3:.1e} ({})",
        if ok1 { "ok" } else { "off" },
        if ok2 { "ok" } else { "off" },
        if ok3 { "ok" } else { "off" },
    );
    verdict(3, pass, t0, &detail);
}

#[test]
fn criterion_4_sufficient_condition_sweep() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [3, 4] {
        let sys = build_example1(p).unwrap();
        let stats = extremal_stats(&sys, 2000).unwrap();
        let pts = theorem1_sweep(&sys, &stats, &default_alpha_grid(), &default_beta_multipliers()).unwrap();
        let holding: Vec<_> = pts.iter().filter(|s| s.condition_holds).collect();
        let bad = holding.iter().filter(|s| s.rho.is_nan() || s.rho >= 1.0).count();
        let at = alpha_tilde(&stats).unwrap();
        let q0 = q_polynomial(&stats, 0.0).unwrap();
        let root_rel = q_polynomial(&stats, at.value).unwrap().abs() / q0;
        let beyond_ok = (1..=50)
            .map(|k| at.value * (1.0 + 0.1 * k as f64))
            .all(|a| q_polynomial(&stats, a).unwrap() < 0.0);
        pass &= bad == 0 && !holding.is_empty() && root_rel <= 1e-6 && beyond_ok;
        parts.push(format!(
            "p={p}: {}/{} holding points with rho<1, alpha~={:.4}, |q(alpha~)|/q(0)={root_rel:.1e}, q<0 beyond: {beyond_ok}",
            holding.len() - bad,
            holding.len(),
            at.value
        ));
    }
    pass &= t0.elapsed().as_secs_f64() < 60.0;
    verdict(4, pass, t0, &parts.join("; "));
}

/// Largest root modulus of `x² - bx + c` from the quadratic formula.
fn max_root_modulus(b: f64, c: f64) -> f64 {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        ((b + s) / 2.0).abs().max(((b - s) / 2.0).abs())
    } else {
        c.sqrt()
    }
}

#[test]
fn criterion_5_lemma1_oracle() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240501);
    let (mut tested, mut agree) = (0usize, 0usize);
    while tested < 100_000 {
        let b: f64 = rng.gen_range(-3.0..3.0);
        let c: f64 = rng.gen_range(-2.0..2.0);
        let m = max_root_modulus(b, c);
        if (m - 1.0).abs() < 1e-9 {
            continue;
        }
        tested += 1;
        if lemma1_root_test(RootTestInput { b_coef: b, c_coef: c }) == (m < 1.0) {
            agree += 1;
        }
    }
    let pass = agree == tested && t0.elapsed().as_secs_f64() < 5.0;
    verdict(5, pass, t0, &format!("{agree}/{tested} samples agree"));
}

fn single_row(cfg: &BenchmarkConfig) -> saddle_bench::BenchmarkRow {
    let rows = run_benchmark(cfg);
    assert_eq!(rows.len(), 1);
    rows.into_iter().next().unwrap()
}

fn it_of(r: &saddle_bench::BenchmarkRow) -> usize {
    r.iterations.unwrap_or(usize::MAX)
}

fn describe(r: &saddle_bench::BenchmarkRow) -> String {
    format!(
        "{} n={}: IT={}{} Res={:.1e}",
        r.precond,
        r.n,
        r.iterations.map_or("-".into(), |v| v.to_string()),
        r.flag.symbol(),
        r.res.unwrap_or(f64::NAN)
    )
}

#[test]
fn criterion_6_table2_iterations() {
    let t0 = Instant::now();
    let converged = |r: &saddle_bench::BenchmarkRow| r.flag == RowFlag::Converged && r.res.unwrap() <= 1e-6;
    let run = |p, k| single_row(&BenchmarkConfig::new(ProblemKind::Example1, vec![p], vec![k]));
    let p16 = run(16, PreconditionerKind::PTriangular);
    let p32 = run(32, PreconditionerKind::PTriangular);
    let id16 = run(16, PreconditionerKind::Identity);
    let ok16 = converged(&p16) && (20..=70).contains(&it_of(&p16));
    let ok32 = converged(&p32) && (25..=85).contains(&it_of(&p32));
    let ratio = it_of(&id16) as f64 / it_of(&p16) as f64;
    let ok_ratio = converged(&id16) && ratio >= 5.0;
    let pass = ok16 && ok32 && ok_ratio && t0.elapsed().as_secs_f64() < 120.0;
    let detail = format!(
        "{} (want [20,70]); {} (want [25,85]); {} ratio {ratio:.2} (want >= 5)",
        describe(&p16),
        describe(&p32),
        describe(&id16)
    );
    verdict(6, pass, t0, &detail);
}

#[test]
fn criterion_7_table4_iterations() {
    let t0 = Instant::now();
    let p = single_row(&BenchmarkConfig::new(ProblemKind::Example2, vec![16], vec![PreconditionerKind::PTriangular]));
    let mut cfg = BenchmarkConfig::new(ProblemKind::Example2, vec![16], vec![PreconditionerKind::PD1]);
    cfg.alpha = 0.1;
    cfg.beta_rule = BetaRule::Manual(1.0);
    let d1 = single_row(&cfg);
    let ok_p = p.flag == RowFlag::Converged && (35..=75).contains(&it_of(&p));
    let ok_d1 = d1.flag == RowFlag::Converged && (45..=95).contains(&it_of(&d1));
    let ordered = it_of(&p) < it_of(&d1);
    let pass = ok_p && ok_d1 && ordered && t0.elapsed().as_secs_f64() < 60.0;
    let detail = format!(
        "{} (want [35,75]); {} (want [45,95]); P < PD1: {ordered}",
        describe(&p),
        describe(&d1)
    );
    verdict(7, pass, t0, &detail);
}

#[test]
fn criterion_8_stationary_contraction() {
    let t0 = Instant::now();
    let sys = build_example1(4).unwrap().rhs_for_all_ones(MonolithicForm::SemipositiveB);
    let stats = extremal_stats(&sys, 2000).unwrap();
    let alpha = 1.01 * alpha_tilde(&stats).unwrap().value;
    let cfg = PreconditionerConfig::new(alpha, alpha).with_policy(InnerSolvePolicy::exact());
    let rho = spectral_report(&iteration_matrix_dense(&sys, &cfg).unwrap(), OperatorTag::IterationG)
        .unwrap()
        .rho;
    let pre = build_preconditioner(&sys, PreconditionerKind::PTriangular, &cfg).unwrap();
    let op = sys.assemble(MonolithicForm::SemipositiveB);
    let b = sys.rhs_vector(MonolithicForm::SemipositiveB);
    let ones = vec![1.0; sys.dim()];
    let (x, rep) = stationary_iterate_with(&op, &pre, &b, 1e-6, 1_000_000, Some(&ones));

    // Res on the symmetric form, recomputed here
    let op_a = sys.assemble(MonolithicForm::SymmetricA);
    let b_a = op_a.spmv(&ones).unwrap();
    let ax = op_a.spmv(&x).unwrap();
    let r: Vec<f64> = b_a.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let res = norm(&r) / norm(&b_a);

    let h = &rep.err_history;
    let window = 100.min(h.len().saturating_sub(1));
    let ratio = if window > 0 {
        (h[h.len() - 1] / h[h.len() - 1 - window]).powf(1.0 / window as f64)
    } else {
        f64::NAN
    };
    let pass = rep.converged() && res <= 1e-6 && ratio <= rho + 0.05 && t0.elapsed().as_secs_f64() < 30.0;
    let detail = format!(
        "alpha=beta={alpha:.4}, rho(G)={rho:.6}, terminal ratio {ratio:.6}, {} iterations, Res={res:.1e}",
        rep.iterations
    );
    verdict(8, pass, t0, &detail);
}

fn table_cell<'a>(table: &'a str, precond: &str, col: &str) -> Option<&'a str> {
    let mut lines = table.lines().filter(|l| l.starts_with('|'));
    let head: Vec<&str> = lines.next()?.split('|').map(str::trim).collect();
    let idx = head.iter().position(|h| *h == col)?;
    let pidx = head.iter().position(|h| *h == "precond")?;
    lines
        .map(|l| l.split('|').map(str::trim).collect::<Vec<_>>())
        .find(|cells| cells.get(pidx) == Some(&precond))
        .and_then(|cells| cells.get(idx).copied())
}

#[test]
fn criterion_9_protocol_fidelity() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_saddle-bench"))
        .args(["--problem", "example1", "--sizes", "16", "--precond", "I,P", "--format", "md"])
        .arg("--save-solutions")
        .arg(dir.path())
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    let mut problems = Vec::new();
    if !out.status.success() {
        problems.push(format!("exit status {:?}", out.status.code()));
    }

    let legend_lines = [
        "Res = ||b - A x||_2 / ||b||_2",
        "true residual",
        "FGMRES from x = 0",
        "Res <= 1e-6",
        "Err = ||x - x*||_2 / ||x*||_2",
        "all-ones exact solution",
        "† not converged within",
        "‡ not converged within 1000 iterations",
        "§ preconditioner not formed",
    ];
    for l in legend_lines {
        if !stdout.contains(l) {
            problems.push(format!("legend lacks '{l}'"));
        }
    }

    let sys = build_example1(16).unwrap();
    let op_a = sys.assemble(MonolithicForm::SymmetricA);
    let ones = vec![1.0; sys.dim()];
    let b = op_a.spmv(&ones).unwrap();
    for k in ["I", "P"] {
        let x = match read_vector_market(dir.path().join(format!("example1_p16_{k}.mtx"))) {
            Ok(x) => x,
            Err(e) => {
                problems.push(format!("{k}: no saved solution ({e})"));
                continue;
            }
        };
        let ax = op_a.spmv(&x).unwrap();
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let res = norm(&r) / norm(&b);
        let e: Vec<f64> = x.iter().map(|v| v - 1.0).collect();
        let err = norm(&e) / norm(&ones);
        let flag = table_cell(&stdout, k, "flag").unwrap_or("?");
        let res_cell = table_cell(&stdout, k, "Res").unwrap_or("?");
        let err_cell = table_cell(&stdout, k, "Err").unwrap_or("?");
        let want_res = format!("{}{flag}", saddle_bench::fmt_sci(res));
        let want_err = format!("{}{flag}", saddle_bench::fmt_sci(err));
        if res_cell != want_res {
            problems.push(format!("{k}: Res cell {res_cell} vs recomputed {want_res}"));
        }
        if err_cell != want_err {
            problems.push(format!("{k}: Err cell {err_cell} vs recomputed {want_err}"));
        }
        if flag.is_empty() && res > 1e-6 {
            problems.push(format!("{k}: converged row with Res {res:.2e}"));
        }
        if !flag.is_empty() && res <= 1e-6 {
            problems.push(format!("{k}: flagged {flag} although Res {res:.2e} meets the tolerance"));
        }
    }
    let pass = problems.is_empty() && t0.elapsed().as_secs_f64() < 30.0;
    let detail = if problems.is_empty() {
        "legend, stopping rule and Res/Err recomputation agree".to_string()
    } else {
        problems.join("; ")
    };
    verdict(9, pass, t0, &detail);
}
