//! Adaptive boundary element solver for the 2D Helmholtz equation on open
//! and closed boundary curves.
//!
//! The crate discretizes two first-kind boundary integral equations — the
//! weakly-singular single-layer equation with piecewise-constant unknowns
//! and the hypersingular equation with continuous piecewise-linear unknowns
//! — and drives them with an adaptive loop: solve, estimate elementwise
//! residual indicators, mark by a Dörfler criterion (optionally expanded by
//! the same number of largest elements), and refine by parameter bisection
//! with a generation-based closure rule.  A small harness layer turns
//! configurations into reproducible convergence logs.

// Frozen reference values keep every digit their oracle produced; numeric
// kernels index several arrays in lockstep; negated comparisons such as
// `!(x > 0.0)` deliberately reject NaN where `x <= 0.0` would accept it.
#![allow(clippy::excessive_precision)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod assembly;
pub mod config;
pub mod error;
pub mod estimator;
pub mod evaluate;
pub mod geometry;
pub mod linalg;
pub mod marking;
pub mod mesh;
pub mod problem;
pub mod space;
pub mod study;
pub mod quadrature;
pub mod special;

pub use error::Error;
