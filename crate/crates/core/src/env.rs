//! Benchmark models and episode simulation.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::concentration::sample_reward;
use crate::error::{Error, Result};
use crate::mdp::{RewardDist, TabularMDP};
use crate::rng::{sample_categorical, stream, MODEL_STREAM};

/// Action indices of the two-action chains.
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Declarative description of a benchmark model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvSpec {
    /// Stochastic chain of `n` states with horizon `n`.
    ///
    /// RIGHT from `s_i` advances with probability `1 - 1/n` and otherwise
    /// stays; at `s_n` it stays and pays 1. LEFT moves back one state; at
    /// `s_1` it stays and pays `1/(4n)`. Episodes start at `s_1`.
    Chain { n: usize },
    /// Contextual bandit as an MDP: every pair transitions to `mu`.
    ///
    /// `mu` defaults to uniform. `reward_means[s][a]` are Bernoulli means and
    /// default to a fixed low-discrepancy fill of `[0, 1]`.
    Bandit {
        states: usize,
        actions: usize,
        horizon: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reward_means: Option<Vec<Vec<f64>>>,
    },
    /// The chain above with deterministic moves (RIGHT always advances).
    DeterministicChain { states: usize },
    /// Combination lock with a single unit reward.
    ///
    /// From corridor state `i < goal_state` exactly one action advances to
    /// `i + 1`; every other action resets to state 0. The advancing action
    /// into `goal_state` pays 1. The goal is absorbing with zero reward, and
    /// states past the goal are unreachable self-loops. Any episode collects
    /// at most one unit of reward.
    SparseReward {
        horizon: usize,
        states: usize,
        actions: usize,
        goal_state: usize,
    },
    /// Dirichlet(`concentration`·1) rows, Bernoulli rewards with uniform
    /// means, uniform start distribution.
    RandomMdp {
        states: usize,
        actions: usize,
        horizon: usize,
        seed: u64,
        concentration: f64,
    },
}

impl EnvSpec {
    /// Short family name used in file names and reports.
    pub fn family(&self) -> &'static str {
        match self {
            EnvSpec::Chain { .. } => "chain",
            EnvSpec::Bandit { .. } => "bandit",
            EnvSpec::DeterministicChain { .. } => "det-chain",
            EnvSpec::SparseReward { .. } => "sparse",
            EnvSpec::RandomMdp { .. } => "random",
        }
    }

    pub fn build(&self) -> Result<TabularMDP> {
        build(self)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn det(v: f64) -> RewardDist {
    RewardDist::Deterministic { value: v }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Correct action at corridor state `i` of the sparse-reward lock.
pub fn lock_action(i: usize, actions: usize) -> usize {
    (i + 1) % actions
}

pub fn build(spec: &EnvSpec) -> Result<TabularMDP> {
    match spec {
        EnvSpec::Chain { n } => chain(*n, false),
        EnvSpec::DeterministicChain { states } => chain(*states, true),
        EnvSpec::Bandit {
            states,
            actions,
            horizon,
            mu,
            reward_means,
        } => bandit(*states, *actions, *horizon, mu.as_deref(), reward_means.as_deref()),
        EnvSpec::SparseReward {
            horizon,
            states,
            actions,
            goal_state,
        } => sparse(*horizon, *states, *actions, *goal_state),
        EnvSpec::RandomMdp {
            states,
            actions,
            horizon,
            seed,
            concentration,
        } => random_mdp(*states, *actions, *horizon, *seed, *concentration),
    }
}

fn chain(n: usize, deterministic: bool) -> Result<TabularMDP> {
    if n < 2 {
        return Err(invalid("chain needs at least 2 states"));
    }
    let slip = if deterministic { 0.0 } else { 1.0 / n as f64 };
    let mut transitions = Vec::with_capacity(n);
    let mut rewards = Vec::with_capacity(n);
    for i in 0..n {
        let left = unit(n, i.saturating_sub(1));
        let right = if i + 1 < n {
            let mut row = vec![0.0; n];
            row[i + 1] = 1.0 - slip;
            row[i] += slip;
            row
        } else {
            unit(n, i)
        };
        let r_left = if i == 0 { 1.0 / (4.0 * n as f64) } else { 0.0 };
        let r_right = if i + 1 == n { 1.0 } else { 0.0 };
        let mut row_pair = vec![Vec::new(); 2];
        row_pair[LEFT] = left;
        row_pair[RIGHT] = right;
        let mut rew = vec![det(0.0); 2];
        rew[LEFT] = det(r_left);
        rew[RIGHT] = det(r_right);
        transitions.push(row_pair);
        rewards.push(rew);
    }
    TabularMDP::new(n, transitions, rewards, unit(n, 0))
}

fn bandit(
    states: usize,
    actions: usize,
    horizon: usize,
    mu: Option<&[f64]>,
    reward_means: Option<&[Vec<f64>]>,
) -> Result<TabularMDP> {
    if states == 0 || actions == 0 || horizon == 0 {
        return Err(invalid("bandit needs positive states, actions and horizon"));
    }
    let mu = match mu {
        Some(m) if m.len() != states => {
            return Err(invalid(format!("mu has {} entries, expected {states}", m.len())))
        }
        Some(m) => m.to_vec(),
        None => vec![1.0 / states as f64; states],
    };
    let means: Vec<Vec<f64>> = match reward_means {
        Some(r) => {
            if r.len() != states || r.iter().any(|row| row.len() != actions) {
                return Err(invalid("reward_means must be states x actions"));
            }
            r.to_vec()
        }
        None => {
            // golden-ratio sequence: deterministic and spread over [0, 1)
            let phi = 0.618_033_988_749_894_9;
            (0..states)
                .map(|s| {
                    (0..actions)
                        .map(|a| (((s * actions + a + 1) as f64) * phi).fract())
                        .collect()
                })
                .collect()
        }
    };
    let transitions = vec![vec![mu.clone(); actions]; states];
    let rewards = means
        .iter()
        .map(|row| row.iter().map(|&m| RewardDist::Bernoulli { mean: m }).collect())
        .collect();
    TabularMDP::new(horizon, transitions, rewards, mu.clone())
        .map_err(|e| invalid(format!("bandit: {e}")))
}

fn sparse(horizon: usize, states: usize, actions: usize, goal: usize) -> Result<TabularMDP> {
    if horizon == 0 || actions < 2 {
        return Err(invalid("sparse reward needs a positive horizon and at least 2 actions"));
    }
    if goal == 0 || goal >= states {
        return Err(invalid(format!("goal_state {goal} must lie in [1, {states})")));
    }
    let mut transitions = Vec::with_capacity(states);
    let mut rewards = Vec::with_capacity(states);
    for i in 0..states {
        if i < goal {
            let right = lock_action(i, actions);
            transitions.push(
                (0..actions)
                    .map(|a| if a == right { unit(states, i + 1) } else { unit(states, 0) })
                    .collect(),
            );
            rewards.push(
                (0..actions)
                    .map(|a| det(if a == right && i + 1 == goal { 1.0 } else { 0.0 }))
                    .collect(),
            );
        } else {
            transitions.push(vec![unit(states, i); actions]);
            rewards.push(vec![det(0.0); actions]);
        }
    }
    TabularMDP::new(horizon, transitions, rewards, unit(states, 0))
}

fn random_mdp(
    states: usize,
    actions: usize,
    horizon: usize,
    seed: u64,
    concentration: f64,
) -> Result<TabularMDP> {
    if states == 0 || actions == 0 || horizon == 0 {
        return Err(invalid("random MDP needs positive states, actions and horizon"));
    }
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(invalid(format!("Dirichlet parameter {concentration} must be positive")));
    }
    let gamma = Gamma::new(concentration, 1.0).map_err(|e| invalid(e.to_string()))?;
    let mut rng = stream(seed, MODEL_STREAM);
    let mut transitions = Vec::with_capacity(states);
    let mut rewards = Vec::with_capacity(states);
    for _ in 0..states {
        let mut rows = Vec::with_capacity(actions);
        let mut rs = Vec::with_capacity(actions);
        for _ in 0..actions {
            let draws: Vec<f64> = (0..states).map(|_| gamma.sample(&mut rng)).collect();
            let total: f64 = draws.iter().sum();
            let row = if total > 0.0 {
                let mut row: Vec<f64> = draws.iter().map(|x| x / total).collect();
                // absorb rounding so the row sums to one
                let drift = 1.0 - row.iter().sum::<f64>();
                let big = (0..states).max_by(|&i, &j| row[i].total_cmp(&row[j])).unwrap_or(0);
                row[big] += drift;
                row
            } else {
                // every gamma draw underflowed; all mass on one state
                unit(states, rng.random_range(0..states))
            };
            rows.push(row);
            rs.push(RewardDist::Bernoulli { mean: rng.random::<f64>() });
        }
        transitions.push(rows);
        rewards.push(rs);
    }
    TabularMDP::new(horizon, transitions, rewards, vec![1.0 / states as f64; states])
}

/// Samples a reward and a successor for `(s, a)`.
///
/// The reward is drawn first, then the next state, both from `rng`.
pub fn step<R: Rng + ?Sized>(mdp: &TabularMDP, s: usize, a: usize, rng: &mut R) -> (usize, f64) {
    let r = sample_reward(&mdp.reward(s, a), rng);
    let s_next = sample_categorical(mdp.transition(s, a), rng);
    (s_next, r)
}

/// Draws an initial state from the start distribution.
pub fn sample_start<R: Rng + ?Sized>(mdp: &TabularMDP, rng: &mut R) -> usize {
    sample_categorical(mdp.start(), rng)
}
