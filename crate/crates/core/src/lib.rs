//! Multi-agent reinforcement learning with credo-based reward redistribution
//! and self-tuning credo agents.
//!
//! - [`credo`]: credo vectors, team structures and the redistribution engine.
//! - [`metrics`]: population reward, inverse-Gini equality, role census.
//! - [`envs`]: the MiniCleanup social dilemma and a credo-response bandit.
//! - [`learners`]: tabular Q-learning behavioral policies.
//! - [`credo_policy`]: the credo lattice and the credo-tuning Q-policy.
//! - [`harness`]: trials, experiments, seeding and output files.
//! - [`sweep`] and [`report`]: initial-credo sweeps and cross-experiment
//!   comparisons.
//!
//! Trials run on rayon when the default `parallel` feature is enabled.

pub mod credo;
pub mod credo_policy;
pub mod envs;
pub mod error;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod report;
pub mod sweep;

pub use error::{Error, Result};
