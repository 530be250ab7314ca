#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod resolvent;
pub mod resonance;
pub mod spectral;

pub use error::{Error, Result};
