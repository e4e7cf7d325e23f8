//! Optimistic exploration with upper/lower value brackets for tabular
//! episodic MDPs.
//!
//! The crate provides an exact finite-horizon solver and hardness
//! diagnostics ([`mdp`]), confidence intervals ([`concentration`]), the
//! learning agent ([`agent`]), benchmark models ([`env`]), a seeded regret
//! harness ([`harness`]) and the command-line front end ([`cli`]).

pub mod agent;
pub mod cli;
pub mod concentration;
pub mod env;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod rng;

pub use agent::{plan, Euler, SufficientStats, ValueBracket};
pub use concentration::{Bernstein, BonusConstants, ConfidenceInterval, Hoeffding};
pub use env::EnvSpec;
pub use error::{Error, Result};
pub use harness::{
    compare, optimism_violation_rate, run_experiment, Algorithm, ExperimentConfig, RegretTrace,
};
pub use mdp::{
    diagnose, optimal_values, policy_values, Diagnostics, PolicyTable, RewardDist, TabularMDP,
    ValueTable,
};
