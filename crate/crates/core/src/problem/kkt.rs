//! Loading externally supplied KKT blocks from Matrix Market files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::BlockSaddleSystem;
use crate::sparse::{read_matrix_market, CholeskyFactor, CsrMatrix, SYMMETRY_TOL};

/// Blocks larger than this (in rows) are not probed.
pub const KKT_PROBE_CAP: usize = 5000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeResult {
    Passed,
    Failed(String),
    NotEvaluated,
}

impl ProbeResult {
    pub fn passed(&self) -> bool {
        matches!(self, ProbeResult::Passed)
    }

    pub fn failed(&self) -> bool {
        matches!(self, ProbeResult::Failed(_))
    }
}

/// Advisory checks on the loaded blocks. None of them prevents loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KktDiagnostics {
    pub a_symmetric: bool,
    pub a_spd: ProbeResult,
    pub b_full_row_rank: ProbeResult,
    pub c_full_row_rank: ProbeResult,
}

impl KktDiagnostics {
    pub fn all_passed(&self) -> bool {
        self.a_symmetric
            && self.a_spd.passed()
            && self.b_full_row_rank.passed()
            && self.c_full_row_rank.passed()
    }
}

fn spd_probe(a: &CsrMatrix) -> ProbeResult {
    if a.nrows() > KKT_PROBE_CAP {
        return ProbeResult::NotEvaluated;
    }
    match CholeskyFactor::new(a, "A") {
        Ok(_) => ProbeResult::Passed,
        Err(e) => ProbeResult::Failed(e.to_string()),
    }
}

/// Full row rank iff the Gram matrix `MMᵀ` admits a Cholesky factorization.
fn rank_probe(m: &CsrMatrix, name: &str) -> ProbeResult {
    if m.nrows() > KKT_PROBE_CAP {
        return ProbeResult::NotEvaluated;
    }
    match CholeskyFactor::new(&m.gram(), name) {
        Ok(_) => ProbeResult::Passed,
        Err(Error::NotPositiveDefinite { pivot, .. }) => {
            ProbeResult::Failed(format!("{name} is not full row rank (row {pivot} dependent)"))
        }
        Err(e) => ProbeResult::Failed(e.to_string()),
    }
}

/// Builds a system (zero right-hand side) from three block files and runs
/// the advisory probes.
pub fn load_kkt_blocks(
    path_a: impl AsRef<Path>,
    path_b: impl AsRef<Path>,
    path_c: impl AsRef<Path>,
) -> Result<(BlockSaddleSystem, KktDiagnostics)> {
    let a = read_matrix_market(path_a)?;
    let b = read_matrix_market(path_b)?;
    let c = read_matrix_market(path_c)?;
    let diag = KktDiagnostics {
        a_symmetric: a.nrows() == a.ncols() && a.is_symmetric(SYMMETRY_TOL),
        a_spd: spd_probe(&a),
        b_full_row_rank: rank_probe(&b, "B"),
        c_full_row_rank: rank_probe(&c, "C"),
    };
    let sys = BlockSaddleSystem::from_blocks_unchecked_symmetry(a, b, c)?;
    Ok((sys, diag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_row_fails_rank_probe() {
        let c = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]).unwrap();
        assert!(rank_probe(&c, "C").failed());
        assert!(rank_probe(&CsrMatrix::identity(3), "B").passed());
    }

    #[test]
    fn probe_skipped_above_cap() {
        let big = CsrMatrix::identity(KKT_PROBE_CAP + 1);
        assert_eq!(spd_probe(&big), ProbeResult::NotEvaluated);
    }
}
