//! Learning bosonic Gaussian states from heterodyne data.
//!
//! The crate is `no_std` (with `alloc`). Matrices are dense `nalgebra` matrices
//! in the quadrature order (X₁, P₁, …, X_m, P_m).
#![cfg_attr(not(test), no_std)]
// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod bounds;
pub mod error;
pub mod estimation;
pub mod gaussian;
pub mod graph;
pub mod learning;
pub mod linalg;
pub mod locality;
pub mod sampling;
pub mod symplectic;

pub use error::{Error, Result};
