use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::problem::BlockSaddleSystem;
use crate::sparse::{norm2_estimate, symmetric_eigenvalues, CsrMatrix, DEFAULT_NORM_MAXIT, DEFAULT_NORM_TOL};

/// Extremal spectral quantities of the blocks. `None` marks a quantity
/// that was not evaluated (dimension above the cap).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtremalStats {
    /// `σ_max(B) = σ_max(Bᵀ)`.
    pub sigma_max_b: Option<f64>,
    /// Smallest singular value of `B` (`√λ_min(BBᵀ)`).
    pub sigma_min_bt: Option<f64>,
    pub sigma_max_c: Option<f64>,
    /// Smallest singular value of `C` (`√λ_min(CCᵀ)`).
    pub sigma_min_ct: Option<f64>,
    pub lambda_min_a: Option<f64>,
}

impl ExtremalStats {
    /// Builds stats from known values, all marked evaluated.
    pub fn from_values(sigma_max_b: f64, sigma_min_bt: f64, sigma_max_c: f64, sigma_min_ct: f64, lambda_min_a: f64) -> Self {
        Self {
            sigma_max_b: Some(sigma_max_b),
            sigma_min_bt: Some(sigma_min_bt),
            sigma_max_c: Some(sigma_max_c),
            sigma_min_ct: Some(sigma_min_ct),
            lambda_min_a: Some(lambda_min_a),
        }
    }

    fn all(&self) -> Result<[f64; 5]> {
        let names = ["sigma_max(B)", "sigma_min(B^T)", "sigma_max(C)", "sigma_min(C^T)", "lambda_min(A)"];
        let vals = [
            self.sigma_max_b,
            self.sigma_min_bt,
            self.sigma_max_c,
            self.sigma_min_ct,
            self.lambda_min_a,
        ];
        let mut out = [0.0; 5];
        for (k, v) in vals.iter().enumerate() {
            out[k] = v.ok_or_else(|| Error::NotEvaluable(format!("{} was not evaluated", names[k])))?;
        }
        Ok(out)
    }
}

fn lambda_min(m: &CsrMatrix, cap: usize) -> Result<Option<f64>> {
    if m.nrows() > cap {
        return Ok(None);
    }
    Ok(symmetric_eigenvalues(&m.to_dense(), cap)?.first().copied())
}

/// `σ_max` by power iteration; `σ_min` and `λ_min(A)` by dense symmetric
/// eigensolves when the matrix order is at most `dim_cap`.
pub fn extremal_stats(sys: &BlockSaddleSystem, dim_cap: usize) -> Result<ExtremalStats> {
    let smax = |m: &CsrMatrix| -> Result<Option<f64>> {
        if m.max_abs() == 0.0 {
            return Ok(Some(0.0));
        }
        Ok(Some(norm2_estimate(m, DEFAULT_NORM_TOL, DEFAULT_NORM_MAXIT)?.value))
    };
    let smin = |m: &CsrMatrix| -> Result<Option<f64>> {
        Ok(lambda_min(&m.gram(), dim_cap)?.map(|v| v.max(0.0).sqrt()))
    };
    Ok(ExtremalStats {
        sigma_max_b: smax(sys.b())?,
        sigma_min_bt: smin(sys.b())?,
        sigma_max_c: smax(sys.c())?,
        sigma_min_ct: smin(sys.c())?,
        lambda_min_a: lambda_min(sys.a(), dim_cap)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SufficiencyReport {
    /// Left-hand side of the sufficient condition.
    pub p_bound: f64,
    /// Right-hand side, `4(α + βσ_min²(Bᵀ))`.
    pub q_bound: f64,
    pub holds: bool,
    /// `P = 2σ_max²(Bᵀ)/λ_min(A)`.
    pub p_cap: f64,
}

/// Evaluates both sides of the sufficient condition as written.
pub fn sufficient_condition(stats: &ExtremalStats, alpha: f64, beta: f64) -> Result<SufficiencyReport> {
    let [smb, sminb, smc, sminc, lam] = stats.all()?;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Usage(format!("alpha and beta must be positive, got {alpha}, {beta}")));
    }
    if !(lam > 0.0) {
        return Err(Error::NotPositiveDefinite {
            block: "A".into(),
            pivot: 0,
        });
    }
    let p_cap = 2.0 * smb * smb / lam;
    let p_bound = smc * smc / (alpha + beta * sminc * sminc) + p_cap;
    let q_bound = 4.0 * (alpha + beta * sminb * sminb);
    Ok(SufficiencyReport {
        p_bound,
        q_bound,
        holds: p_bound < q_bound,
        p_cap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaTilde {
    pub value: f64,
    /// `Δ`, the discriminant of `q`.
    pub discriminant: f64,
    pub p_cap: f64,
    /// `|q(α̃)| / q(0)`, a self-check of the root.
    pub root_residual: f64,
}

/// `q(α)`; see the module documentation.
pub fn q_polynomial(stats: &ExtremalStats, alpha: f64) -> Result<f64> {
    let [smb, sminb, smc, sminc, lam] = stats.all()?;
    let p = 2.0 * smb * smb / lam;
    let (ub, uc) = (1.0 + sminb * sminb, 1.0 + sminc * sminc);
    Ok(-4.0 * ub * uc * alpha * alpha + p * uc * alpha + smc * smc)
}

/// The positive root `α̃ = [P(1+σ_min²(Cᵀ)) + √Δ] / [8(1+σ_min²(Bᵀ))(1+σ_min²(Cᵀ))]`.
pub fn alpha_tilde(stats: &ExtremalStats) -> Result<AlphaTilde> {
    let [smb, sminb, smc, sminc, lam] = stats.all()?;
    if !(lam > 0.0) {
        return Err(Error::NotPositiveDefinite {
            block: "A".into(),
            pivot: 0,
        });
    }
    let p = 2.0 * smb * smb / lam;
    let (ub, uc) = (1.0 + sminb * sminb, 1.0 + sminc * sminc);
    let disc = p * p * uc * uc + 16.0 * ub * uc * smc * smc;
    let value = (p * uc + disc.sqrt()) / (8.0 * ub * uc);
    let q0 = smc * smc;
    let qv = q_polynomial(stats, value)?;
    let scale = if q0 > 0.0 { q0 } else { (p * uc * value).abs().max(f64::MIN_POSITIVE) };
    Ok(AlphaTilde {
        value,
        discriminant: disc,
        p_cap: p,
        root_residual: qv.abs() / scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaRule {
    /// `β = (α/2)(1/‖C‖₂² + 1/‖B‖₂²)`.
    Averaged,
    /// `β = α/‖C‖₂²`.
    COnly,
    /// `β = α/‖B‖₂²`.
    BOnly,
    Manual(f64),
}

impl fmt::Display for BetaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Averaged => f.write_str("ave"),
            Self::COnly => f.write_str("c"),
            Self::BOnly => f.write_str("b"),
            Self::Manual(v) => write!(f, "manual:{v}"),
        }
    }
}

impl FromStr for BetaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "ave" | "averaged" => Ok(Self::Averaged),
            "c" => Ok(Self::COnly),
            "b" => Ok(Self::BOnly),
            _ => {
                let v = s
                    .strip_prefix("manual:")
                    .ok_or_else(|| Error::Usage(format!("unknown beta rule '{s}' (expected ave, c, b or manual:<v>)")))?;
                let v: f64 = v
                    .parse()
                    .map_err(|_| Error::Usage(format!("cannot parse manual beta '{v}'")))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Usage(format!("manual beta must be positive, got {v}")));
                }
                Ok(Self::Manual(v))
            }
        }
    }
}

/// `β` from precomputed spectral norms.
pub fn beta_from_norms(norm_b: f64, norm_c: f64, alpha: f64, rule: BetaRule) -> Result<f64> {
    let need = |v: f64, name: &str| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Usage(format!("beta rule needs a nonzero norm of {name}")))
        }
    };
    Ok(match rule {
        BetaRule::Averaged => 0.5 * alpha * (1.0 / need(norm_c, "C")?.powi(2) + 1.0 / need(norm_b, "B")?.powi(2)),
        BetaRule::COnly => alpha / need(norm_c, "C")?.powi(2),
        BetaRule::BOnly => alpha / need(norm_b, "B")?.powi(2),
        BetaRule::Manual(v) => v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSelection {
    pub alpha: f64,
    pub beta: f64,
    pub beta_rule: BetaRule,
    pub norm_b: f64,
    pub norm_c: f64,
    /// Whether both power iterations met their tolerance.
    pub norms_converged: bool,
}

/// Computes `β` for `α` under `rule`, estimating `‖B‖₂` and `‖C‖₂` by power
/// iteration with the default tolerance and iteration cap.
pub fn beta_rule(sys: &BlockSaddleSystem, alpha: f64, rule: BetaRule) -> Result<ParamSelection> {
    let (nb, nc, conv) = if let BetaRule::Manual(_) = rule {
        (f64::NAN, f64::NAN, true)
    } else {
        let eb = norm2_estimate(sys.b(), DEFAULT_NORM_TOL, DEFAULT_NORM_MAXIT)?;
        let ec = norm2_estimate(sys.c(), DEFAULT_NORM_TOL, DEFAULT_NORM_MAXIT)?;
        (eb.value, ec.value, eb.converged && ec.converged)
    };
    Ok(ParamSelection {
        alpha,
        beta: beta_from_norms(nb, nc, alpha, rule)?,
        beta_rule: rule,
        norm_b: nb,
        norm_c: nc,
        norms_converged: conv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_stats_plug_in() {
        let s = ExtremalStats::from_values(1.0, 1.0, 1.0, 1.0, 1.0);
        let r = sufficient_condition(&s, 1.0, 1.0).unwrap();
        assert_eq!((r.p_bound, r.q_bound, r.holds), (2.5, 8.0, true));
        let t = alpha_tilde(&s).unwrap();
        assert_eq!(t.discriminant, 80.0);
        assert!((t.value - (4.0 + 80f64.sqrt()) / 32.0).abs() < 1e-15);
        assert!(t.root_residual < 1e-12);
    }

    #[test]
    fn degenerate_c() {
        let s = ExtremalStats::from_values(1.0, 0.5, 0.0, 1.0, 2.0);
        let t = alpha_tilde(&s).unwrap();
        let p = 2.0 * 1.0 / 2.0;
        assert!((t.discriminant - (p * 2.0f64).powi(2)).abs() < 1e-14);
        assert!((t.value - p / (4.0 * 1.25)).abs() < 1e-15);
    }

    #[test]
    fn small_parameters_fail_condition() {
        let s = ExtremalStats::from_values(1.0, 1.0, 1.0, 1.0, 1.0);
        assert!(!sufficient_condition(&s, 1e-6, 1e-6).unwrap().holds);
    }

    #[test]
    fn unevaluated_is_not_evaluable() {
        let mut s = ExtremalStats::from_values(1.0, 1.0, 1.0, 1.0, 1.0);
        s.sigma_min_ct = None;
        assert!(matches!(sufficient_condition(&s, 1.0, 1.0), Err(Error::NotEvaluable(_))));
        assert!(matches!(alpha_tilde(&s), Err(Error::NotEvaluable(_))));
    }

    #[test]
    fn nonpositive_lambda_rejected() {
        let s = ExtremalStats::from_values(1.0, 1.0, 1.0, 1.0, 0.0);
        assert!(matches!(alpha_tilde(&s), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn beta_rules() {
        assert_eq!(beta_from_norms(1.0, 1.0, 0.5, BetaRule::Averaged).unwrap(), 0.5);
        assert_eq!(beta_from_norms(2.0, 1.0, 1.0, BetaRule::BOnly).unwrap(), 0.25);
        assert_eq!(beta_from_norms(2.0, 4.0, 1.0, BetaRule::COnly).unwrap(), 1.0 / 16.0);
        assert!(beta_from_norms(0.0, 1.0, 1.0, BetaRule::Averaged).is_err());
    }

    #[test]
    fn beta_rule_parsing() {
        assert_eq!("manual:0.94".parse::<BetaRule>().unwrap(), BetaRule::Manual(0.94));
        assert_eq!("ave".parse::<BetaRule>().unwrap(), BetaRule::Averaged);
        assert!("manual:x".parse::<BetaRule>().is_err());
        assert!("manual:-1".parse::<BetaRule>().is_err());
        assert!("median".parse::<BetaRule>().is_err());
    }

    #[test]
    fn stats_of_small_blocks() {
        let sys = BlockSaddleSystem::new(
            CsrMatrix::from_diagonal(&[3.0, 7.0]),
            CsrMatrix::from_diagonal(&[2.0, 1.0]),
            CsrMatrix::identity(2),
        )
        .unwrap();
        let s = extremal_stats(&sys, 100).unwrap();
        assert!((s.sigma_max_b.unwrap() - 2.0).abs() < 1e-8);
        assert!((s.sigma_min_bt.unwrap() - 1.0).abs() < 1e-12);
        assert!((s.lambda_min_a.unwrap() - 3.0).abs() < 1e-12);
        let capped = extremal_stats(&sys, 1).unwrap();
        assert_eq!(capped.lambda_min_a, None);
        assert!(capped.sigma_max_b.is_some());
    }
}
