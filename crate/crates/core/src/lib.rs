//! Numerical laboratory for matrix-valued concentration on expander walks.
//!
//! - [`linalg`]: dense complex Hermitian spectral calculus, Schatten norms,
//!   Kronecker/vec identities, dilation.
//! - [`conformal`]: the unit-disk to half-disk map, Poisson kernel bounds,
//!   the rotation measure `μ` and the bounded multi-matrix Golden-Thompson check.
//! - [`expander`]: regular multigraphs, explicit families, spectral gap, walks.
//! - [`sampler`]: mean-zero matrix functions, tail probabilities (Monte Carlo
//!   and exact), the expander matrix Chernoff bound.
//! - [`healy`]: the tensorized transfer operator and its contraction lemmas.
//! - [`martingale`]: martingale approximation of walk sums.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod error;
pub mod expander;
pub mod healy;
pub mod linalg;
pub mod martingale;
pub mod quadrature;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
