//! Toeplitz matrices generated by the order-dependent symbol
//! `f_n(θ) = θ² Σ_{j<n} (n|θ|)^{-j/n}`: symbol evaluation, bound constants,
//! minimal-eigenvalue checks and fast preconditioned solvers.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod experiments;
pub mod krylov;
pub mod linalg;
pub mod multigrid;
pub mod preconditioners;
pub mod quadrature;
pub mod spectral;
pub mod symbols;
pub mod toeplitz;
pub mod transforms;

pub use error::{Error, Result};
