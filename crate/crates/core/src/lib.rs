//! Simulation and boundedness certification for spatially discretized
//! two-species reaction-diffusion systems.
//!
//! The pipeline is: [`model`] describes the system, [`llf`] verifies a
//! Lyapunov-like function, [`bounds`] turns it into an a priori bound,
//! [`sim`] integrates trajectories while monitoring the bound's lemmas, and
//! [`certificates`] covers the systems for which no such function exists.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod catalog;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod llf;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
