//! Mean-field and finite-market simulation of two-sided marketplace
//! experiments: customer-side, listing-side and two-sided randomization,
//! the estimators built on them, and their asymptotic limits.

pub mod asymptotics;
pub mod designs;
pub mod error;
pub mod estimators;
pub mod finite_sim;
pub mod harness;
pub mod ledger;
pub mod market;
pub mod mean_field;
pub mod presets;
pub mod rng;

pub use error::{Error, Result};
