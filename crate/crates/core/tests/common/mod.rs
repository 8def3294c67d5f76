#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saddle_core::problem::BlockSaddleSystem;
use saddle_core::sparse::{CsrMatrix, DenseMatrix};

pub fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.nrows(), m.ncols(), m.values())
}

pub fn csr_to_na(m: &CsrMatrix) -> DMatrix<f64> {
    to_na(&m.to_dense())
}

/// A well-posed random system: `A = MᵀM + I`, `B = [D | R]`,
/// `C = [D' | R']` with nonzero diagonals `D`, `D'`.
pub fn random_system(seed: u64, n: usize, m: usize, l: usize) -> BlockSaddleSystem {
    assert!(n >= m && m >= l);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(0.4) {
                t.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    let mm = CsrMatrix::from_triplets(n, n, &t).unwrap();
    let a = mm.transpose().matmul(&mm).unwrap().shifted(1.0, 1.0).unwrap();
    let coupling = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| {
        let mut t = Vec::new();
        for i in 0..rows {
            t.push((i, i, rng.gen_range(1.0..2.0)));
            for j in rows..cols {
                if rng.gen_bool(0.3) {
                    t.push((i, j, rng.gen_range(-0.5..0.5)));
                }
            }
        }
        CsrMatrix::from_triplets(rows, cols, &t).unwrap()
    };
    let b = coupling(m, n, &mut rng);
    let c = coupling(l, m, &mut rng);
    BlockSaddleSystem::new(a, b, c).unwrap()
}

pub fn random_vec(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
