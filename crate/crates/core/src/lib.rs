//! Numerical constants for enhanced binding of a spinless particle coupled to
//! a quantized radiation field with sharp ultraviolet cutoff `Λ = 1`.
//!
//! Units: `ħ = c = 1`, electron mass `m = 1/2` so that `p² = -Δ`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod error;
pub mod photon;
pub mod potential;
pub mod quadrature;
pub mod schrodinger;
pub mod tridiag;

pub use error::{Error, Result};
