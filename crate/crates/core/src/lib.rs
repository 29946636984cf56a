//! Numerics for the Heisenberg calculus: group geometry, hypoellipticity
//! checks, the Folland–Stein heat kernel, Weyl coefficients and desk-scale
//! spectral oracles.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod group;
pub mod hypo;
pub mod mehler;
pub mod oracle;
pub mod quad;
pub mod weyl;

pub use error::{Error, Result};
pub use group::{GroupSpec, Point};
