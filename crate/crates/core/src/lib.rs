//! Repair scheduling for earthquake-damaged power distribution networks.
//!
//! The pipeline samples a correlated ground-motion field, turns it into
//! component damage through fragility curves, and plans crew assignments
//! with rollout over fixed-priority heuristics. [`runner`] ties the stages
//! together into Monte Carlo experiments.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod damage;
pub mod error;
pub mod geometry;
pub mod io;
pub mod hazard;
pub mod network;
pub mod par;
pub mod planner;
pub mod rng;
pub mod runner;
pub mod sim;
pub mod testbed;

pub use error::{Error, Result};
