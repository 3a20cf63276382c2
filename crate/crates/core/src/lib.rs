#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod consumption;
pub mod equilibrium;
pub mod error;
pub mod filtration;
pub mod preferences;
pub mod pricing;
pub mod sample;

pub use error::{Error, Result};
