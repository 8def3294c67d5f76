use num_complex::Complex64;

use super::params::{sufficient_condition, ExtremalStats};
use crate::error::{Error, Result};
use crate::precond::{
    build_preconditioner, preconditioned_dense, InnerSolvePolicy, PreconditionerConfig, PreconditionerKind,
};
use crate::problem::{BlockSaddleSystem, MonolithicForm};
use crate::sparse::{dense_eigenvalues, DenseMatrix, DENSE_EIGEN_CAP};

/// `G = I - 𝒫⁻¹ℬ`, the iteration matrix of the splitting, assembled from
/// exact applications of `𝒫` to the columns of `ℬ`.
pub fn iteration_matrix_dense(sys: &BlockSaddleSystem, config: &PreconditionerConfig) -> Result<DenseMatrix> {
    let cfg = config.clone().with_policy(InnerSolvePolicy::exact());
    let p = build_preconditioner(sys, PreconditionerKind::PTriangular, &cfg)?;
    let pb = preconditioned_dense(&p, sys, MonolithicForm::SemipositiveB)?;
    Ok(DenseMatrix::identity(sys.dim()).add_scaled(1.0, &pb, -1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorTag {
    IterationG,
    PreconditionedPB,
    PreconditionedPA,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Complex64>,
    pub rho: f64,
    pub operator_tag: OperatorTag,
    /// `max |λ - 1|`, reported for preconditioned operators.
    pub max_dist_from_one: Option<f64>,
}

pub fn spectral_report(m: &DenseMatrix, tag: OperatorTag) -> Result<SpectralReport> {
    let eigenvalues = dense_eigenvalues(m, DENSE_EIGEN_CAP)?;
    let rho = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let max_dist_from_one = match tag {
        OperatorTag::IterationG => None,
        _ => Some(
            eigenvalues
                .iter()
                .map(|l| (l - Complex64::new(1.0, 0.0)).norm())
                .fold(0.0, f64::max),
        ),
    };
    Ok(SpectralReport {
        eigenvalues,
        rho,
        operator_tag: tag,
        max_dist_from_one,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootTestInput {
    pub b_coef: f64,
    pub c_coef: f64,
}

/// Both roots of `x² - bx + c` lie strictly inside the unit disc iff
/// `|c| < 1` and `|b| < 1 + c`.
pub fn lemma1_root_test(q: RootTestInput) -> bool {
    q.c_coef.abs() < 1.0 && q.b_coef.abs() < 1.0 + q.c_coef
}

/// `logspace(-3, 1, 9)`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-3.0 + 0.5 * k as f64)).collect()
}

/// `β ∈ {α, 2α, 10α}`.
pub fn default_beta_multipliers() -> Vec<f64> {
    vec![1.0, 2.0, 10.0]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    pub beta: f64,
    pub condition_holds: bool,
    pub rho: f64,
}

/// Evaluates the sufficient condition and the dense spectral radius of `G`
/// at every `(α, β = c·α)` point of the grid.
pub fn theorem1_sweep(
    sys: &BlockSaddleSystem,
    stats: &ExtremalStats,
    alphas: &[f64],
    beta_multipliers: &[f64],
) -> Result<Vec<SweepPoint>> {
    if sys.dim() > DENSE_EIGEN_CAP {
        return Err(Error::Capacity(format!("sweep needs dense spectra of order {}", sys.dim())));
    }
    let mut out = Vec::with_capacity(alphas.len() * beta_multipliers.len());
    for &alpha in alphas {
        for &mult in beta_multipliers {
            let beta = mult * alpha;
            let cond = sufficient_condition(stats, alpha, beta)?;
            let g = iteration_matrix_dense(sys, &PreconditionerConfig::new(alpha, beta))?;
            let rho = spectral_report(&g, OperatorTag::IterationG)?.rho;
            out.push(SweepPoint {
                alpha,
                beta,
                condition_holds: cond.holds,
                rho,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrMatrix;

    #[test]
    fn lemma_boundary_cases() {
        assert!(lemma1_root_test(RootTestInput { b_coef: 0.0, c_coef: 0.0 }));
        assert!(!lemma1_root_test(RootTestInput { b_coef: 2.0, c_coef: 1.0 }));
    }

    #[test]
    fn zero_matrix_has_zero_radius() {
        let r = spectral_report(&DenseMatrix::zeros(3, 3), OperatorTag::IterationG).unwrap();
        assert_eq!(r.rho, 0.0);
        assert_eq!(r.max_dist_from_one, None);
    }

    #[test]
    fn scalar_iteration_matrix() {
        // A = 2, B = C = 1, α = β = 1: 𝒫 = [2 1 0; 0 2 -1; 0 0 2], ℬ = [2 1 0; -1 0 -1; 0 1 0]
        let sys = BlockSaddleSystem::new(
            CsrMatrix::from_diagonal(&[2.0]),
            CsrMatrix::identity(1),
            CsrMatrix::identity(1),
        )
        .unwrap();
        let g = iteration_matrix_dense(&sys, &PreconditionerConfig::new(1.0, 1.0)).unwrap();
        let p = DenseMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![0.0, 2.0, -1.0], vec![0.0, 0.0, 2.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![-1.0, 0.0, -1.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let want = p.solve(&p.add_scaled(1.0, &b, -1.0)).unwrap();
        assert!(g.add_scaled(1.0, &want, -1.0).max_abs() < 1e-15);
    }

    #[test]
    fn default_grid_endpoints() {
        let g = default_alpha_grid();
        assert_eq!(g.len(), 9);
        assert!((g[0] - 1e-3).abs() < 1e-18 && (g[8] - 10.0).abs() < 1e-12);
    }
}
