//! Numerical local symbol calculus for the basic zeta coefficient of
//! boundary problems at a frozen base point.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod appendix;
pub mod boundary;
pub mod builtins;
pub mod closed;
pub mod config;
pub mod densities;
pub mod error;
pub mod fit;
pub mod jet;
pub mod logtransform;
pub mod model;
pub mod quad;
pub mod rational;
pub mod symbol;
pub mod zeta;

pub use error::{Error, Result};
pub use num_complex::Complex64;
