//! Simulator and algorithms for waking a swarm of sleeping robots in the plane.

// `!(x >= y)` rejects NaN along with small values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exploration;
pub mod geometry;
pub mod grid_wave;
pub mod harness;
pub mod instances;
pub mod oracles;
pub mod run;
pub mod sampling;
pub mod separator;
pub mod sim;
pub mod waketree;

pub use error::AlgoError;
