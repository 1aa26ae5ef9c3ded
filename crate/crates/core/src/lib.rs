//! Variable-exponent Lebesgue and Stepanov norms, almost automorphy tests,
//! and convolution solvers for fractional relaxation equations.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod almost_auto;
pub mod composition;
pub mod convolution;
pub mod corpus;
pub mod error;
pub mod exponent;
pub mod fractional;
pub mod function_model;
pub mod interval;
pub mod modular_norm;
pub mod quadrature;
pub mod registry;
pub mod report;
pub mod stepanov;

pub use error::{Error, Result};
