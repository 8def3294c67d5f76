//! Block saddle point systems: containers, generators, KKT ingestion and
//! monolithic assembly.

mod examples;
mod kkt;

pub use examples::{build_example1, build_example2};
pub use kkt::{load_kkt_blocks, KktDiagnostics, ProbeResult, KKT_PROBE_CAP};

use crate::error::{check_len, Error, Result};
use crate::sparse::{CsrMatrix, SYMMETRY_TOL};

/// Which monolithic matrix the right-hand side refers to.
///
/// `SymmetricA` is `[A Bᵀ 0; B 0 Cᵀ; 0 C 0]`; `SemipositiveB` negates the
/// second block row: `[A Bᵀ 0; -B 0 -Cᵀ; 0 C 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonolithicForm {
    SymmetricA,
    SemipositiveB,
}

/// The blocks `(A, B, C)` with `A: n x n`, `B: m x n`, `C: l x m`, and a
/// right-hand side `(f, g, h)` stated for [`Self::rhs_form`].
#[derive(Debug, Clone)]
pub struct BlockSaddleSystem {
    a: CsrMatrix,
    b: CsrMatrix,
    c: CsrMatrix,
    f: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
    rhs_form: MonolithicForm,
}

impl BlockSaddleSystem {
    /// Validated constructor with a zero right-hand side. Requires
    /// consistent shapes, `n >= m >= l` and a symmetric `A`.
    pub fn new(a: CsrMatrix, b: CsrMatrix, c: CsrMatrix) -> Result<Self> {
        let sys = Self::from_blocks_unchecked_symmetry(a, b, c)?;
        if !sys.a.is_symmetric(SYMMETRY_TOL) {
            return Err(Error::Usage("block A is not symmetric".into()));
        }
        Ok(sys)
    }

    /// Shape checks only; `A` may be nonsymmetric. Used for external KKT
    /// blocks, which are flagged rather than refused.
    pub fn from_blocks_unchecked_symmetry(a: CsrMatrix, b: CsrMatrix, c: CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Usage(format!("block A is {}x{}, not square", n, a.ncols())));
        }
        if b.ncols() != n {
            return Err(Error::Usage(format!(
                "block B has {} columns, A has order {n}",
                b.ncols()
            )));
        }
        let m = b.nrows();
        if c.ncols() != m {
            return Err(Error::Usage(format!(
                "block C has {} columns, B has {m} rows",
                c.ncols()
            )));
        }
        let l = c.nrows();
        if !(n >= m && m >= l) {
            return Err(Error::Usage(format!(
                "block sizes must satisfy n >= m >= l, got n={n}, m={m}, l={l}"
            )));
        }
        Ok(Self {
            a,
            b,
            c,
            f: vec![0.0; n],
            g: vec![0.0; m],
            h: vec![0.0; l],
            rhs_form: MonolithicForm::SymmetricA,
        })
    }

    pub fn a(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn b(&self) -> &CsrMatrix {
        &self.b
    }

    pub fn c(&self) -> &CsrMatrix {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.nrows()
    }

    pub fn l(&self) -> usize {
        self.c.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n() + self.m() + self.l()
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn rhs_form(&self) -> MonolithicForm {
        self.rhs_form
    }

    /// Replaces the right-hand side, stated for `form`.
    pub fn with_rhs(mut self, rhs: BlockVector, form: MonolithicForm) -> Result<Self> {
        check_len("rhs f", self.n(), rhs.x.len())?;
        check_len("rhs g", self.m(), rhs.y.len())?;
        check_len("rhs h", self.l(), rhs.z.len())?;
        self.f = rhs.x;
        self.g = rhs.y;
        self.h = rhs.z;
        self.rhs_form = form;
        Ok(self)
    }

    /// Sets `(f; g; h)` so that the `form` matrix maps the all-ones vector
    /// onto it.
    pub fn rhs_for_all_ones(self, form: MonolithicForm) -> Self {
        let ones = BlockVector::ones(self.n(), self.m(), self.l());
        let rhs = self.apply_blocks(&ones, form);
        self.with_rhs(rhs, form).expect("shapes match by construction")
    }

    /// Right-hand side for `form`, flipping `g` if it was stored for the
    /// other form.
    pub fn rhs_vector(&self, form: MonolithicForm) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        out.extend_from_slice(&self.f);
        if form == self.rhs_form {
            out.extend_from_slice(&self.g);
        } else {
            out.extend(self.g.iter().map(|v| -v));
        }
        out.extend_from_slice(&self.h);
        out
    }

    /// Product of the `form` matrix with a block vector, computed blockwise.
    pub fn apply_blocks(&self, v: &BlockVector, form: MonolithicForm) -> BlockVector {
        let mut x = self.a.spmv(&v.x).expect("x length");
        let bty = self.b.spmv_transpose(&v.y).expect("y length");
        x.iter_mut().zip(&bty).for_each(|(a, b)| *a += b);
        let mut y = self.b.spmv(&v.x).expect("x length");
        let ctz = self.c.spmv_transpose(&v.z).expect("z length");
        y.iter_mut().zip(&ctz).for_each(|(a, b)| *a += b);
        if form == MonolithicForm::SemipositiveB {
            y.iter_mut().for_each(|a| *a = -*a);
        }
        let z = self.c.spmv(&v.y).expect("y length");
        BlockVector { x, y, z }
    }

    pub fn assemble(&self, form: MonolithicForm) -> CsrMatrix {
        assemble_monolithic(self, form)
    }
}

/// Sparse `(n+m+l)`-square matrix of the chosen form.
pub fn assemble_monolithic(sys: &BlockSaddleSystem, form: MonolithicForm) -> CsrMatrix {
    let bt = sys.b.transpose();
    let ct = sys.c.transpose();
    let (b2, ct2) = match form {
        MonolithicForm::SymmetricA => (sys.b.clone(), ct),
        MonolithicForm::SemipositiveB => (sys.b.scale(-1.0), ct.scale(-1.0)),
    };
    CsrMatrix::block(&[
        vec![Some(&sys.a), Some(&bt), None],
        vec![Some(&b2), None, Some(&ct2)],
        vec![None, Some(&sys.c), None],
    ])
    .expect("block shapes validated at construction")
}

pub fn rhs_for_all_ones(sys: BlockSaddleSystem, form: MonolithicForm) -> BlockSaddleSystem {
    sys.rhs_for_all_ones(form)
}

/// A vector partitioned as `(x; y; z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl BlockVector {
    pub fn zeros(n: usize, m: usize, l: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; m],
            z: vec![0.0; l],
        }
    }

    pub fn ones(n: usize, m: usize, l: usize) -> Self {
        Self {
            x: vec![1.0; n],
            y: vec![1.0; m],
            z: vec![1.0; l],
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x.len() + self.y.len() + self.z.len());
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.y);
        v.extend_from_slice(&self.z);
        v
    }

    pub fn unflatten(v: &[f64], n: usize, m: usize, l: usize) -> Result<Self> {
        check_len("block vector", n + m + l, v.len())?;
        Ok(Self {
            x: v[..n].to_vec(),
            y: v[n..n + m].to_vec(),
            z: v[n + m..].to_vec(),
        })
    }
}
