//! Sparse (CSR) and small dense linear algebra.

mod cholesky;
mod csr;
mod dense;
pub mod eigen;
pub mod mm;
mod norm;
pub mod ordering;
pub mod scalar;

pub use cholesky::{cholesky_factor, cholesky_solve, CholeskyFactor, SYMMETRY_TOL};
pub use csr::CsrMatrix;
pub use dense::DenseMatrix;
pub(crate) use dense::{lu_factor, lu_solve};
pub use eigen::{dense_eigenvalues, symmetric_eigenvalues, DENSE_EIGEN_CAP};
pub use mm::{read_matrix_market, write_matrix_market};
pub use norm::{norm2_estimate, sigma_min_estimate, Norm2Estimate, DEFAULT_NORM_MAXIT, DEFAULT_NORM_TOL};
pub use scalar::{DoubleDouble, Scalar};
