//! Maslov-type index of CR singularities of surfaces `w = F_m(z) + R(z)` in
//! `ℂ²` and numerical Bishop discs attached near positive-index points.
//!
//! The modules build on each other bottom-up:
//!
//! - [`circle`]: spectral toolkit for functions on `∂𝔻`.
//! - [`surface`]: polynomials in `(z, z̄)`, germs, generators.
//! - [`maslov`]: the index by three formulas, cross-checked.
//! - [`conformal`]: Riemann map onto `{F_m < 1}` and the auxiliary `R`.
//! - [`bishop`]: contraction solve for the discs and the nonexistence probe.
//! - [`report`]: serializable run reports.
//! - [`cli`]: the `bishop-discs` command-line front end.

// `!(x <= limit)` deliberately treats NaN as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bishop;
pub mod circle;
pub mod cli;
pub mod conformal;
pub mod maslov;
pub mod report;
pub mod surface;
