//! The two synthetic benchmark families.

use crate::error::{Error, Result};
use crate::problem::BlockSaddleSystem;
use crate::sparse::CsrMatrix;

fn check_p(p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::Usage(format!("grid parameter p must be at least 2, got {p}")));
    }
    Ok(())
}

/// Family 1: `n = 2p²`, `m = l = p²`.
///
/// `T = tridiag(-1, 2, -1)/h²`, `F = tridiag(0, 1, -1)/h` with
/// `h = 1/(p+1)`; `A = blkdiag(I⊗T + T⊗I, I⊗T + T⊗I)`, `B = [I⊗F, F⊗I]`,
/// `C = E⊗F` with `E = diag(1, p+1, 2p+1, ..., p²-p+1)`.
pub fn build_example1(p: usize) -> Result<BlockSaddleSystem> {
    check_p(p)?;
    let h = 1.0 / (p as f64 + 1.0);
    let t = CsrMatrix::tridiag(-1.0, 2.0, -1.0, p, 1.0 / (h * h))?;
    let f = CsrMatrix::tridiag(0.0, 1.0, -1.0, p, 1.0 / h)?;
    let id = CsrMatrix::identity(p);
    let lap = id.kron(&t)?.add_scaled(1.0, &t.kron(&id)?, 1.0)?;
    let a = CsrMatrix::block_diag(&[&lap, &lap])?;
    let b = CsrMatrix::hstack(&[&id.kron(&f)?, &f.kron(&id)?])?;
    let e: Vec<f64> = (0..p).map(|k| (k * p + 1) as f64).collect();
    let c = CsrMatrix::from_diagonal(&e).kron(&f)?;
    debug_assert_eq!((b.nrows(), c.nrows()), (p * p, p * p));
    BlockSaddleSystem::new(a, b, c)
}

/// The `p x (p+1)` bidiagonal matrix with 2 on the diagonal and -1 above.
fn e_hat(p: usize) -> Result<CsrMatrix> {
    let mut t = Vec::with_capacity(2 * p);
    for i in 0..p {
        t.push((i, i, 2.0));
        t.push((i, i + 1, -1.0));
    }
    CsrMatrix::from_triplets(p, p + 1, &t)
}

/// Family 2: with `p̃ = p²` and `p̂ = p(p+1)`, `n = p̂ + 4p̃`, `m = 2p̃`,
/// `l = p̂`.
///
/// `A = blkdiag(2WᵀW + I, D₂, D₃)` where `w_ij = exp(-2((i/3)² + (j/3)²))`
/// (1-based), `B = [E, -I, I]`, `C = Eᵀ` and `E = [Ê⊗I; I⊗Ê]`.
pub fn build_example2(p: usize) -> Result<BlockSaddleSystem> {
    check_p(p)?;
    let pt = p * p;
    let ph = p * (p + 1);

    let mut wt = Vec::new();
    for i in 1..=ph {
        for j in 1..=ph {
            let (x, y) = (i as f64 / 3.0, j as f64 / 3.0);
            let w = (-2.0 * (x * x + y * y)).exp();
            if w.abs() >= 1e-300 {
                wt.push((i - 1, j - 1, w));
            }
        }
    }
    let w = CsrMatrix::from_triplets(ph, ph, &wt)?;
    let a1 = w.transpose().matmul(&w)?.add_scaled(2.0, &CsrMatrix::identity(ph), 1.0)?;

    let d2: Vec<f64> = (1..=2 * pt)
        .map(|j| {
            if j <= pt {
                1.0
            } else {
                1e-5 * ((j - pt) as f64).powi(2)
            }
        })
        .collect();
    let d3: Vec<f64> = (1..=2 * pt).map(|j| 1e-5 * ((j + pt) as f64).powi(2)).collect();
    let a = CsrMatrix::block_diag(&[
        &a1,
        &CsrMatrix::from_diagonal(&d2),
        &CsrMatrix::from_diagonal(&d3),
    ])?;

    let eh = e_hat(p)?;
    let ip = CsrMatrix::identity(p);
    let e = CsrMatrix::vstack(&[&eh.kron(&ip)?, &ip.kron(&eh)?])?;
    let i2 = CsrMatrix::identity(2 * pt);
    let b = CsrMatrix::hstack(&[&e, &i2.scale(-1.0), &i2])?;
    let c = e.transpose();
    BlockSaddleSystem::new(a, b, c)
}
