//! Concentration inequalities, PAC-Bayes bounds and online learning
//! policies, with a seeded simulator for regret experiments.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod divergences;
pub mod environments;
pub mod error;
pub mod lab;
pub mod online_policies;
pub mod pac_bayes;
pub mod rng;

pub use error::{Error, Result};
