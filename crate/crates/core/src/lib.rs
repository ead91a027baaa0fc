//! Multi-agent odor source localization: plume sensing, a collaborative
//! particle filter, a one-step POMDP planner, energy accounting and a
//! Monte Carlo harness.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod energy;
pub mod error;
pub mod estimator;
pub mod output;
pub mod planner;
pub mod plume;
pub mod sim;

pub use error::{OslError, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
