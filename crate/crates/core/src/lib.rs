//! Numerical toolkit for k-Hessian equations with gradient-type terms.
//!
//! The crate covers the pointwise operator algebra (sums of principal minors
//! and their column-replaced companions), scalar-field calculus with analytic
//! or finite-difference derivatives, the Kazdan–Kramer change of variables
//! that removes the gradient term, growth-regime classifiers for sublinear /
//! superlinear / Sobolev-subcritical / exponential-critical nonlinearities, a
//! radial Dirichlet solver and eigenvalue machinery on the unit ball, and
//! Pohozaev-type non-existence scans.
//!
//! Everything is desk-scale: dense matrices of dimension ≤ ~10, radial grids
//! of a few thousand nodes, and tolerances tight enough to certify the
//! identities the pieces are built on.

// validation guards are written `!(x > 0.0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod error;
pub mod expr;
pub mod field;
pub mod minors;
pub mod pohozaev;
pub mod quad;
pub mod radial;
pub mod transform;

pub use error::{Error, Result};
