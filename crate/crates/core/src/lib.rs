//! Block upper-triangular preconditioning for three-by-three block saddle
//! point systems
//!
//! ```text
//! [ A  Bᵀ 0  ] [x]   [f]
//! [ B  0  Cᵀ ] [y] = [g]
//! [ 0  C  0  ] [z]   [h]
//! ```
//!
//! with `A` symmetric positive definite and `B`, `C` of full row rank.

// `!(x > 0.0)` is used on purpose so that NaN fails the guard
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod analysis;
pub mod krylov;
pub mod precond;
pub mod problem;
pub mod sparse;

pub use error::{Error, Result};
