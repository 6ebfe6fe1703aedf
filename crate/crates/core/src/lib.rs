//! Pucci-class parabolic operators, boundary barriers, a monotone lattice
//! solver and an estimator harness for boundary Harnack type constants.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod operators;
pub mod solver;

pub use error::{Error, Result};
