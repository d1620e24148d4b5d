//! The Berezin transform on the Fock-type spaces `F²ₘ` (weight `e^{-|z|^m}`)
//! applied to polynomials in `z` and `z̄`.
//!
//! * [`numerics`]: log-gamma, beta, the weights `d_j`, Gauss-Legendre rules.
//! * [`poly`]: polynomials in `z, z̄`, their strip decomposition, Fock norms.
//! * [`berezin`]: kernel, strip series of `K·B_m f`, the exact `m = 2`
//!   transform and an independent quadrature evaluation.
//! * [`spectral`]: operator matrices, fixed-point verdicts, rank profiles,
//!   scans for exceptional weights and the binomial obstruction.
//! * [`cli`]: the `berezin-lab` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod berezin;
pub mod cli;
mod error;
pub mod numerics;
pub mod poly;
pub mod spectral;

pub use error::{Error, Result};
