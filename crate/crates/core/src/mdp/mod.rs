//! Ground-truth tabular episodic MDPs.
//!
//! Timesteps are 1-based throughout the public API: an episode visits
//! `t = 1..=H`, and value tables carry an extra terminal row `t = H + 1`
//! that is identically zero.

mod diagnostics;
mod solver;

pub use diagnostics::{
    diagnose, environmental_norm, max_return, successor_range, theoretical_bounds, value_range,
    Diagnostics, TheoreticalBounds,
};
pub(crate) use diagnostics::bounds_from;
pub use solver::{optimal_values, policy_values, q_value};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-sum and simplex tolerance for probability vectors.
pub const PROB_TOL: f64 = 1e-9;

/// Reward distribution attached to a state-action pair.
///
/// Only kinds with closed-form mean, variance and support maximum are
/// supported. New kinds must provide all three.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RewardDist {
    Deterministic { value: f64 },
    Bernoulli { mean: f64 },
}

impl RewardDist {
    pub fn mean(&self) -> f64 {
        match *self {
            RewardDist::Deterministic { value } => value,
            RewardDist::Bernoulli { mean } => mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            RewardDist::Deterministic { .. } => 0.0,
            RewardDist::Bernoulli { mean } => mean * (1.0 - mean),
        }
    }

    /// Largest value in the support.
    pub fn max_value(&self) -> f64 {
        match *self {
            RewardDist::Deterministic { value } => value,
            RewardDist::Bernoulli { mean } => {
                if mean > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            RewardDist::Deterministic { value } => value,
            RewardDist::Bernoulli { mean } => mean,
        };
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidModel(format!(
                "reward parameter {v} outside [0, 1]"
            )));
        }
        Ok(())
    }
}

/// A stationary finite-horizon MDP with known model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MdpJson", into = "MdpJson")]
pub struct TabularMDP {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    /// Flattened `[s][a][s']`.
    transitions: Vec<f64>,
    /// Flattened `[s][a]`.
    rewards: Vec<RewardDist>,
    start: Vec<f64>,
}

impl TabularMDP {
    /// Builds and validates a model. `transitions[s][a]` is the next-state
    /// distribution of the pair, `rewards[s][a]` its reward law.
    pub fn new(
        horizon: usize,
        transitions: Vec<Vec<Vec<f64>>>,
        rewards: Vec<Vec<RewardDist>>,
        start: Vec<f64>,
    ) -> Result<Self> {
        let num_states = transitions.len();
        if num_states == 0 {
            return Err(Error::InvalidModel("no states".into()));
        }
        let num_actions = transitions[0].len();
        if num_actions == 0 {
            return Err(Error::InvalidModel("no actions".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidModel("horizon must be positive".into()));
        }
        if rewards.len() != num_states {
            return Err(Error::InvalidModel(format!(
                "rewards table has {} states, transitions have {num_states}",
                rewards.len()
            )));
        }
        let mut flat_p = Vec::with_capacity(num_states * num_actions * num_states);
        let mut flat_r = Vec::with_capacity(num_states * num_actions);
        for (s, (rows, rs)) in transitions.iter().zip(&rewards).enumerate() {
            if rows.len() != num_actions || rs.len() != num_actions {
                return Err(Error::InvalidModel(format!(
                    "state {s} does not have {num_actions} actions"
                )));
            }
            for (a, row) in rows.iter().enumerate() {
                if row.len() != num_states {
                    return Err(Error::InvalidModel(format!(
                        "transition row ({s},{a}) has length {}, expected {num_states}",
                        row.len()
                    )));
                }
                check_simplex(row).map_err(|e| {
                    Error::InvalidModel(format!("transition row ({s},{a}): {e}"))
                })?;
                flat_p.extend_from_slice(row);
            }
            for r in rs {
                r.validate()?;
                flat_r.push(*r);
            }
        }
        if start.len() != num_states {
            return Err(Error::InvalidModel(format!(
                "start distribution has length {}, expected {num_states}",
                start.len()
            )));
        }
        check_simplex(&start)
            .map_err(|e| Error::InvalidModel(format!("start distribution: {e}")))?;
        Ok(Self {
            num_states,
            num_actions,
            horizon,
            transitions: flat_p,
            rewards: flat_r,
            start,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Next-state distribution of `(s, a)`.
    pub fn transition(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.num_actions + a) * self.num_states;
        &self.transitions[base..base + self.num_states]
    }

    pub fn reward(&self, s: usize, a: usize) -> RewardDist {
        self.rewards[s * self.num_actions + a]
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    /// Successor states with positive probability.
    pub fn support(&self, s: usize, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.transition(s, a)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(s2, _)| s2)
    }

    /// Same model with states relabeled: old state `s` becomes `perm[s]`.
    pub fn permute_states(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_states;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::InvalidArgument("not a permutation of the states".into()));
        }
        let mut transitions = vec![vec![vec![0.0; n]; self.num_actions]; n];
        let mut rewards = vec![vec![RewardDist::Deterministic { value: 0.0 }; self.num_actions]; n];
        let mut start = vec![0.0; n];
        for s in 0..n {
            start[perm[s]] = self.start[s];
            for a in 0..self.num_actions {
                rewards[perm[s]][a] = self.reward(s, a);
                for (s2, &p) in self.transition(s, a).iter().enumerate() {
                    transitions[perm[s]][a][perm[s2]] = p;
                }
            }
        }
        Self::new(self.horizon, transitions, rewards, start)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_simplex(p: &[f64]) -> std::result::Result<(), String> {
    if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(format!("entry {x} is negative or not finite"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(format!("sums to {total}, expected 1"));
    }
    Ok(())
}

/// On-disk layout of a [`TabularMDP`].
#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct MdpJson {
    S: usize,
    A: usize,
    H: usize,
    transitions: Vec<Vec<Vec<f64>>>,
    rewards: Vec<Vec<RewardDist>>,
    start: Vec<f64>,
}

impl TryFrom<MdpJson> for TabularMDP {
    type Error = Error;

    fn try_from(j: MdpJson) -> Result<Self> {
        let mdp = TabularMDP::new(j.H, j.transitions, j.rewards, j.start)?;
        if mdp.num_states != j.S || mdp.num_actions != j.A {
            return Err(Error::InvalidModel(format!(
                "declared S={}, A={} but tables have S={}, A={}",
                j.S, j.A, mdp.num_states, mdp.num_actions
            )));
        }
        Ok(mdp)
    }
}

impl From<TabularMDP> for MdpJson {
    fn from(m: TabularMDP) -> Self {
        let (s_n, a_n) = (m.num_states, m.num_actions);
        MdpJson {
            S: s_n,
            A: a_n,
            H: m.horizon,
            transitions: (0..s_n)
                .map(|s| (0..a_n).map(|a| m.transition(s, a).to_vec()).collect())
                .collect(),
            rewards: (0..s_n)
                .map(|s| (0..a_n).map(|a| m.reward(s, a)).collect())
                .collect(),
            start: m.start,
        }
    }
}

/// Deterministic nonstationary policy: `(state, timestep) -> action`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyTable {
    num_states: usize,
    horizon: usize,
    /// Flattened `[t-1][s]`.
    actions: Vec<usize>,
}

impl PolicyTable {
    /// Policy that plays `action` everywhere.
    pub fn constant(num_states: usize, horizon: usize, action: usize) -> Self {
        Self {
            num_states,
            horizon,
            actions: vec![action; num_states * horizon],
        }
    }

    /// Builds a policy from a closure `(s, t) -> a`, `t` 1-based.
    pub fn from_fn(num_states: usize, horizon: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        let mut actions = Vec::with_capacity(num_states * horizon);
        for t in 1..=horizon {
            for s in 0..num_states {
                actions.push(f(s, t));
            }
        }
        Self {
            num_states,
            horizon,
            actions,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Action at state `s` and timestep `t` (1-based). Panics when out of range.
    pub fn action(&self, s: usize, t: usize) -> usize {
        assert!(s < self.num_states && (1..=self.horizon).contains(&t));
        self.actions[(t - 1) * self.num_states + s]
    }

    pub fn set(&mut self, s: usize, t: usize, a: usize) {
        assert!(s < self.num_states && (1..=self.horizon).contains(&t));
        self.actions[(t - 1) * self.num_states + s] = a;
    }

    /// Checks every entry against an action count.
    pub fn validate(&self, num_actions: usize) -> Result<()> {
        match self.actions.iter().position(|&a| a >= num_actions) {
            Some(i) => Err(Error::InvalidArgument(format!(
                "policy action {} at (s={}, t={}) outside [0, {num_actions})",
                self.actions[i],
                i % self.num_states,
                i / self.num_states + 1
            ))),
            None => Ok(()),
        }
    }
}

/// Value function over timesteps `1..=H+1`; row `H+1` is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    num_states: usize,
    horizon: usize,
    /// Flattened `[t-1][s]`, `H + 1` rows.
    values: Vec<f64>,
}

impl ValueTable {
    pub fn zeros(num_states: usize, horizon: usize) -> Self {
        Self {
            num_states,
            horizon,
            values: vec![0.0; num_states * (horizon + 1)],
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, t: usize, s: usize) -> f64 {
        self.row(t)[s]
    }

    pub fn set(&mut self, t: usize, s: usize, v: f64) {
        assert!((1..=self.horizon).contains(&t), "row H+1 is fixed at zero");
        let n = self.num_states;
        self.values[(t - 1) * n + s] = v;
    }

    /// Values at timestep `t` for every state.
    pub fn row(&self, t: usize) -> &[f64] {
        assert!((1..=self.horizon + 1).contains(&t));
        let n = self.num_states;
        &self.values[(t - 1) * n..t * n]
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &ValueTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
