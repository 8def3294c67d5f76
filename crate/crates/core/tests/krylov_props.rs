mod common;

use common::{diff_norm, norm, random_system, random_vec};
use proptest::prelude::*;
use saddle_core::analysis::{alpha_tilde, extremal_stats, iteration_matrix_dense, spectral_report, OperatorTag};
use saddle_core::krylov::{
    cg_into, fgmres, relative_residual, stationary_iterate, stationary_iterate_with, CgWorkspace,
    IdentityPreconditioner, SolveFlag, SolveParams,
};
use saddle_core::precond::{build_preconditioner, InnerSolvePolicy, PreconditionerConfig, PreconditionerKind};
use saddle_core::problem::{build_example1, MonolithicForm};
use saddle_core::sparse::CsrMatrix;

fn params(tol: f64, maxit: usize) -> SolveParams {
    SolveParams {
        tol,
        maxit,
        ..SolveParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn fgmres_residuals_are_monotone_and_finite_terminating(seed in any::<u64>(), kind_idx in 0usize..7) {
        let kind = PreconditionerKind::ALL[kind_idx];
        let sys = random_system(seed, 7, 5, 3).rhs_for_all_ones(MonolithicForm::SemipositiveB);
        let op = sys.assemble(MonolithicForm::SemipositiveB);
        let b = sys.rhs_vector(MonolithicForm::SemipositiveB);
        let cfg = PreconditionerConfig::new(0.5, 0.5).with_policy(InnerSolvePolicy::exact());
        let p = build_preconditioner(&sys, kind, &cfg).unwrap().with_outer_form(MonolithicForm::SemipositiveB);
        let (x, rep) = fgmres(&op, &p, &b, &params(1e-10, 1000));
        prop_assert_eq!(rep.flag, SolveFlag::Converged);
        prop_assert!(rep.iterations <= sys.dim());
        prop_assert_eq!(rep.res_history.len(), rep.iterations + 1);
        prop_assert_eq!(rep.res_history[0], 1.0);
        for w in rep.res_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-8) + 1e-14);
        }
        prop_assert!((relative_residual(&op, &x, &b) - rep.final_res).abs() <= 1e-14);
        prop_assert!(rep.final_res <= 1e-10);
    }

    #[test]
    fn cg_energy_error_is_monotone(seed in any::<u64>()) {
        let sys = random_system(seed, 12, 4, 2);
        let a = sys.a();
        let xs = random_vec(seed ^ 9, 12);
        let rhs = a.spmv(&xs).unwrap();
        let mut energy = Vec::new();
        for k in 0..=12 {
            let mut ws = CgWorkspace::new(12);
            let mut x = vec![0.0; 12];
            cg_into(a, &rhs, &mut x, 1e-300, k.max(1), &mut ws, None);
            if k == 0 {
                x.iter_mut().for_each(|v| *v = 0.0);
            }
            let e: Vec<f64> = x.iter().zip(&xs).map(|(p, q)| p - q).collect();
            let ae = a.spmv(&e).unwrap();
            energy.push(e.iter().zip(&ae).map(|(p, q)| p * q).sum::<f64>().sqrt());
        }
        let scale = energy[0];
        for w in energy.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10 * scale, "{:?}", energy);
        }
    }
}

#[test]
fn fgmres_with_identity_solves_small_spd_system() {
    let a = CsrMatrix::tridiag(-1.0, 2.0, -1.0, 20, 1.0).unwrap();
    let xs = vec![1.0; 20];
    let b = a.spmv(&xs).unwrap();
    let (x, rep) = fgmres(&a, &IdentityPreconditioner(20), &b, &params(1e-12, 100));
    assert!(rep.converged());
    assert!(rep.iterations <= 20);
    assert!(diff_norm(&x, &xs) < 1e-9);
}

#[test]
fn fgmres_reports_maxit() {
    let sys = build_example1(4).unwrap().rhs_for_all_ones(MonolithicForm::SemipositiveB);
    let op = sys.assemble(MonolithicForm::SemipositiveB);
    let b = sys.rhs_vector(MonolithicForm::SemipositiveB);
    let (_, rep) = fgmres(&op, &IdentityPreconditioner(op.nrows()), &b, &params(1e-14, 5));
    assert_eq!(rep.flag, SolveFlag::MaxIt);
    assert_eq!(rep.iterations, 5);
}

#[test]
fn stationary_and_fgmres_agree() {
    let sys = build_example1(3).unwrap().rhs_for_all_ones(MonolithicForm::SemipositiveB);
    let stats = extremal_stats(&sys, 2000).unwrap();
    let at = alpha_tilde(&stats).unwrap().value;
    // ρ(G) is about 0.999 here, so the splitting iteration is slow
    let alpha = 1.01 * at;
    let cfg = PreconditionerConfig::new(alpha, alpha).with_policy(InnerSolvePolicy::exact());
    let (xs, srep) = stationary_iterate(&sys, &cfg, 1e-10, 200_000).unwrap();
    assert_eq!(srep.flag, SolveFlag::Converged, "{:?}", srep.final_res);
    let p = build_preconditioner(&sys, PreconditionerKind::PTriangular, &cfg).unwrap();
    let op = sys.assemble(MonolithicForm::SemipositiveB);
    let b = sys.rhs_vector(MonolithicForm::SemipositiveB);
    let (xg, grep) = fgmres(&op, &p, &b, &params(1e-10, 1000));
    assert!(grep.converged());
    let xs = xs.flatten();
    assert!(diff_norm(&xs, &xg) <= 1e-7 * norm(&xg));
    assert!(grep.iterations <= srep.iterations);
}

#[test]
fn stationary_error_contracts_at_spectral_rate() {
    let sys = build_example1(3).unwrap().rhs_for_all_ones(MonolithicForm::SemipositiveB);
    let stats = extremal_stats(&sys, 2000).unwrap();
    let alpha = 1.01 * alpha_tilde(&stats).unwrap().value;
    let cfg = PreconditionerConfig::new(alpha, alpha).with_policy(InnerSolvePolicy::exact());
    let rho = spectral_report(&iteration_matrix_dense(&sys, &cfg).unwrap(), OperatorTag::IterationG)
        .unwrap()
        .rho;
    assert!(rho < 1.0);
    let p = build_preconditioner(&sys, PreconditionerKind::PTriangular, &cfg).unwrap();
    let op = sys.assemble(MonolithicForm::SemipositiveB);
    let b = sys.rhs_vector(MonolithicForm::SemipositiveB);
    let ones = vec![1.0; sys.dim()];
    let (_, rep) = stationary_iterate_with(&op, &p, &b, 1e-10, 200_000, Some(&ones));
    assert!(rep.converged());
    let h = &rep.err_history;
    let k = h.len() - 1;
    let ratio = (h[k] / h[k - 100]).powf(0.01);
    assert!(ratio <= rho + 0.05, "ratio {ratio} vs rho {rho}");
}

#[test]
fn stationary_iteration_detects_divergence() {
    // α far below α̃ with β = α makes the iteration matrix expansive
    let sys = build_example1(3).unwrap().rhs_for_all_ones(MonolithicForm::SemipositiveB);
    let cfg = PreconditionerConfig::new(1e-1, 1e-1).with_policy(InnerSolvePolicy::exact());
    let rho = spectral_report(&iteration_matrix_dense(&sys, &cfg).unwrap(), OperatorTag::IterationG)
        .unwrap()
        .rho;
    assert!(rho > 1.0);
    let (_, rep) = stationary_iterate(&sys, &cfg, 1e-10, 5000).unwrap();
    assert_eq!(rep.flag, SolveFlag::Breakdown);
}
