//! Convergence theory for the splitting iteration and spectral diagnostics.
//!
//! For `ℬ = 𝒫 - ℛ` the iteration `x ← 𝒫⁻¹ℛx + 𝒫⁻¹b` converges for every
//! starting vector when
//!
//! ```text
//! σ_max²(C)/(α + βσ_min²(Cᵀ)) + 2σ_max²(Bᵀ)/λ_min(A) < 4(α + βσ_min²(Bᵀ))
//! ```
//!
//! With `β ≥ α` this holds as soon as `α` exceeds the positive root `α̃` of
//! `q(α) = -4(1+σ_min²(Bᵀ))(1+σ_min²(Cᵀ))α² + P(1+σ_min²(Cᵀ))α + σ_max²(C)`,
//! `P = 2σ_max²(Bᵀ)/λ_min(A)`.

mod extended;
mod params;
mod spectral;

pub use extended::preconditioned_spectrum_extended;
pub use params::{
    alpha_tilde, beta_from_norms, beta_rule, extremal_stats, q_polynomial, sufficient_condition, AlphaTilde,
    BetaRule, ExtremalStats, ParamSelection, SufficiencyReport,
};
pub use spectral::{
    default_alpha_grid, default_beta_multipliers, iteration_matrix_dense, lemma1_root_test, spectral_report,
    theorem1_sweep, OperatorTag, RootTestInput, SpectralReport, SweepPoint,
};
