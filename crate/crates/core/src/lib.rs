//! Numerical laboratory for difference-quotient characterizations of
//! Sobolev, BV and Lebesgue norms: survival curves of `|u(x+h) − u(x)|/|h|^b`
//! under `|h|^{γ−n} dx dh`, their weak and Lorentz quasi-norms, the limiting
//! constants, interpolation inequalities, counterexample families and Haar
//! coefficient bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod counterexamples;
pub mod error;
pub mod funcspace;
pub mod interpolation;
pub mod limits;
pub mod measures;
pub mod norms;
pub mod poly;
pub mod quad;
pub mod wavelets;

pub use error::{Error, Result};
