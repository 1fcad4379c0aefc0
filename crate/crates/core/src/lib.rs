//! Collaborative beamforming for UAV virtual antenna arrays.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod checkpoint;
pub mod channel;
pub mod energy;
pub mod env;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod neural;
pub mod trainer;

pub use error::{Error, Result};
