//! Geometric representations of linear second-order ODEs `u'' + h u = 0`.
//!
//! The crate builds the four metric families attached to a coefficient
//! function `h` (hyperbolic, (anti-)de Sitter, complex sphere and
//! Kähler-Norden), integrates their geodesics, rebuilds solution bases of the
//! ODE from explicit-form geodesics and checks the curvature and Riccati
//! identities numerically.

// NaN-rejecting `!(a > b)` guards and index loops over tensor components
// are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod curve;
pub mod expr;
pub mod geodesics;
pub mod geometry;
pub mod jet;
pub mod kahler_norden;
pub mod ode;
pub mod quadrature;
pub mod reconstruct;
pub mod sampling;
pub mod scalar;

pub use expr::{eval_jet2, parse, ExprError, Expression, Mode};
pub use jet::{HyperJet, Jet2};
