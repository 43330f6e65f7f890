//! Numerical toolkit for trapped modes in curved three-dimensional waveguides.
//!
//! The pipeline runs in three stages: a P1 finite-element analysis of the
//! planar cross-section (`crosssec`), a rotation-minimizing frame along the
//! centerline (`curves`), and the closed-form sufficient conditions that
//! combine the two (`conditions`). `shapederiv` differentiates the
//! cross-section vector with respect to boundary perturbations.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod conditions;
pub mod crosssec;
pub mod curves;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod quad;
pub mod shapederiv;

pub use error::{Error, Result};
