//! Spectra of preconditioned operators in double-double arithmetic.
//!
//! `𝒫₁⁻¹𝒜` with the exact Schur complement has the single eigenvalue 1 but
//! is not diagonalizable. A Jordan block of size `k` turns `f64` rounding
//! `ε` into an eigenvalue spread of about `ε^(1/k)`, which is above 1e-6 for
//! `k = 3`. Assembling and reducing the operator with ~32 digits brings the
//! spread well below that.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::precond::{PreconditionerConfig, PreconditionerKind};
use crate::problem::{BlockSaddleSystem, MonolithicForm};
use crate::sparse::eigen::general_eigenvalues;
use crate::sparse::{lu_factor, lu_solve, CsrMatrix, DoubleDouble, Scalar, DENSE_EIGEN_CAP};

type Dd = DoubleDouble;

#[derive(Clone)]
struct Mat {
    r: usize,
    c: usize,
    v: Vec<Dd>,
}

impl Mat {
    fn zeros(r: usize, c: usize) -> Self {
        Self {
            r,
            c,
            v: vec![Dd::zero(); r * c],
        }
    }

    fn from_csr(m: &CsrMatrix) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for (i, j, x) in m.triplets() {
            out.v[i * m.ncols() + j] = Dd::from_f64(x);
        }
        out
    }

    fn t(&self) -> Self {
        let mut o = Self::zeros(self.c, self.r);
        for i in 0..self.r {
            for j in 0..self.c {
                o.v[j * self.r + i] = self.v[i * self.c + j];
            }
        }
        o
    }

    fn mul(&self, b: &Self) -> Self {
        assert_eq!(self.c, b.r);
        let mut o = Self::zeros(self.r, b.c);
        for i in 0..self.r {
            for k in 0..self.c {
                let a = self.v[i * self.c + k];
                if a == Dd::zero() {
                    continue;
                }
                for j in 0..b.c {
                    o.v[i * b.c + j] += a * b.v[k * b.c + j];
                }
            }
        }
        o
    }

    /// `self⁻¹ rhs` by LU with partial pivoting.
    fn solve(&self, rhs: &Self) -> Result<Self> {
        assert_eq!(self.r, self.c);
        let mut lu = self.v.clone();
        let piv = lu_factor(self.r, &mut lu)?;
        let mut x = rhs.v.clone();
        lu_solve(self.r, &lu, &piv, &mut x, rhs.c);
        Ok(Self {
            r: rhs.r,
            c: rhs.c,
            v: x,
        })
    }

    fn put(&mut self, r0: usize, c0: usize, b: &Self, sign: f64) {
        let s = Dd::from_f64(sign);
        for i in 0..b.r {
            for j in 0..b.c {
                self.v[(r0 + i) * self.c + c0 + j] += s * b.v[i * b.c + j];
            }
        }
    }

    fn eye(n: usize) -> Self {
        let mut o = Self::zeros(n, n);
        for i in 0..n {
            o.v[i * n + i] = Dd::one();
        }
        o
    }
}

/// Eigenvalues of `𝒫ₖ⁻¹ M` with `M` the `form` matrix. Schur-based kinds
/// use the exact `S = B A⁻¹ Bᵀ` regardless of `config.schur_mode`; kinds
/// targeting the other form are composed with `J = diag(I, -I, I)`.
pub fn preconditioned_spectrum_extended(
    sys: &BlockSaddleSystem,
    kind: PreconditionerKind,
    config: &PreconditionerConfig,
    form: MonolithicForm,
) -> Result<Vec<Complex64>> {
    let (n, m, l) = (sys.n(), sys.m(), sys.l());
    let dim = n + m + l;
    if dim > DENSE_EIGEN_CAP {
        return Err(Error::Capacity(format!("extended spectrum of order {dim} exceeds cap {DENSE_EIGEN_CAP}")));
    }
    let a = Mat::from_csr(sys.a());
    let b = Mat::from_csr(sys.b());
    let c = Mat::from_csr(sys.c());
    let (bt, ct) = (b.t(), c.t());

    let mut p = Mat::zeros(dim, dim);
    match kind {
        PreconditionerKind::Identity => p = Mat::eye(dim),
        PreconditionerKind::PTriangular | PreconditionerKind::PD1 => {
            let al = Dd::from_f64(config.alpha);
            let be = Dd::from_f64(config.beta);
            let shifted = |x: &Mat| {
                let mut g = x.mul(&x.t());
                g.v.iter_mut().for_each(|v| *v *= be);
                for i in 0..g.r {
                    g.v[i * g.r + i] += al;
                }
                g
            };
            p.put(0, 0, &a, 1.0);
            p.put(n, n, &shifted(&b), 1.0);
            p.put(n + m, n + m, &shifted(&c), 1.0);
            if kind == PreconditionerKind::PTriangular {
                p.put(0, n, &bt, 1.0);
                p.put(n, n + m, &ct, -1.0);
            }
        }
        _ => {
            let s = b.mul(&a.solve(&bt)?);
            let k = c.mul(&s.solve(&ct)?);
            p.put(0, 0, &a, 1.0);
            let ks = if matches!(kind, PreconditionerKind::PD2 | PreconditionerKind::P1) {
                1.0
            } else {
                -1.0
            };
            p.put(n + m, n + m, &k, ks);
            match kind {
                PreconditionerKind::PD2 => p.put(n, n, &s, 1.0),
                PreconditionerKind::P1 | PreconditionerKind::P2 => {
                    p.put(n, 0, &b, 1.0);
                    p.put(n, n, &s, -1.0);
                    p.put(n, n + m, &ct, 1.0);
                }
                _ => {
                    p.put(0, n, &bt, 1.0);
                    p.put(n, 0, &b, 1.0);
                    p.put(n, n, &s, -1.0);
                }
            }
        }
    }

    let mut op = Mat::zeros(dim, dim);
    op.put(0, 0, &a, 1.0);
    op.put(0, n, &bt, 1.0);
    op.put(n + m, n, &c, 1.0);
    let sign = if form == MonolithicForm::SymmetricA { 1.0 } else { -1.0 };
    op.put(n, 0, &b, sign);
    op.put(n, n + m, &ct, sign);
    if kind != PreconditionerKind::Identity && form != kind.native_form() {
        // 𝒫 is paired with the other form as 𝒫J, i.e. its block row 2 of
        // the operator is negated before the solve
        for i in n..n + m {
            for j in 0..dim {
                op.v[i * dim + j] = -op.v[i * dim + j];
            }
        }
    }
    let mat = p.solve(&op)?;
    let ev = general_eigenvalues(dim, mat.v)?;
    Ok(ev
        .into_iter()
        .map(|(re, im)| Complex64::new(re.to_f64(), im.to_f64()))
        .collect())
}
