//! The learner: count-based model estimates and bracketed optimistic planning.
//!
//! Each episode the planner runs backward induction on the empirical model,
//! producing an upper value table `V̄` (optimistic, drives the greedy policy)
//! and a lower table `V̲` (pessimistic). The gap `V̄ - V̲` at the successor
//! states feeds back into the transition bonus as a correction term.
//!
//! Counts are shared across timesteps: the model is stationary.
//!
//! The Q-value cap at timestep `t` is `H - t + 1`, the number of rewards
//! still to be collected. Capping at `H - t` would pin `V̄_H` to zero.

use serde::{Deserialize, Serialize};

use crate::concentration::{weighted_two_norm, ConfidenceInterval};
use crate::error::{Error, Result};
use crate::mdp::{PolicyTable, ValueTable};

/// Visit counts and reward moments per state-action pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    num_states: usize,
    num_actions: usize,
    /// `n(s,a)`, flattened `[s][a]`.
    visits: Vec<u64>,
    /// Flattened `[s][a][s']`.
    trans_counts: Vec<u64>,
    reward_sum: Vec<f64>,
    reward_sq_sum: Vec<f64>,
}

impl SufficientStats {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        let sa = num_states * num_actions;
        Self {
            num_states,
            num_actions,
            visits: vec![0; sa],
            trans_counts: vec![0; sa * num_states],
            reward_sum: vec![0.0; sa],
            reward_sq_sum: vec![0.0; sa],
        }
    }

    /// Builds statistics from raw tables.
    ///
    /// `trans_counts` is indexed `[s][a][s']`; visit counts are its row sums.
    /// `reward_sum` and `reward_sq_sum` are indexed `[s][a]`.
    pub fn from_counts(
        trans_counts: &[Vec<Vec<u64>>],
        reward_sum: &[Vec<f64>],
        reward_sq_sum: &[Vec<f64>],
    ) -> Result<Self> {
        let num_states = trans_counts.len();
        let num_actions = trans_counts.first().map_or(0, Vec::len);
        let shape_ok = trans_counts
            .iter()
            .all(|row| row.len() == num_actions && row.iter().all(|c| c.len() == num_states))
            && [reward_sum, reward_sq_sum]
                .iter()
                .all(|t| t.len() == num_states && t.iter().all(|r| r.len() == num_actions));
        if num_states == 0 || num_actions == 0 || !shape_ok {
            return Err(Error::InvalidState("count tables must be non-empty S x A (x S)".into()));
        }
        let stats = Self {
            num_states,
            num_actions,
            visits: trans_counts
                .iter()
                .flat_map(|row| row.iter().map(|c| c.iter().sum()))
                .collect(),
            trans_counts: trans_counts.iter().flatten().flatten().copied().collect(),
            reward_sum: reward_sum.iter().flatten().copied().collect(),
            reward_sq_sum: reward_sq_sum.iter().flatten().copied().collect(),
        };
        stats.validate()?;
        Ok(stats)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn idx(&self, s: usize, a: usize) -> usize {
        s * self.num_actions + a
    }

    pub fn visits(&self, s: usize, a: usize) -> u64 {
        self.visits[self.idx(s, a)]
    }

    pub fn transition_counts(&self, s: usize, a: usize) -> &[u64] {
        let base = self.idx(s, a) * self.num_states;
        &self.trans_counts[base..base + self.num_states]
    }

    /// Records one transition `(s, a) -> s_next` with reward `r ∈ [0, 1]`.
    pub fn observe(&mut self, s: usize, a: usize, r: f64, s_next: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidArgument(format!("reward {r} outside [0, 1]")));
        }
        if s >= self.num_states || s_next >= self.num_states || a >= self.num_actions {
            return Err(Error::InvalidArgument(format!(
                "transition ({s}, {a}) -> {s_next} out of range"
            )));
        }
        let i = self.idx(s, a);
        self.visits[i] += 1;
        self.trans_counts[i * self.num_states + s_next] += 1;
        self.reward_sum[i] += r;
        self.reward_sq_sum[i] += r * r;
        Ok(())
    }

    /// Maximum-likelihood next-state distribution; `None` when unvisited.
    pub fn p_hat(&self, s: usize, a: usize) -> Option<Vec<f64>> {
        let n = self.visits(s, a);
        (n > 0).then(|| {
            self.transition_counts(s, a)
                .iter()
                .map(|&c| c as f64 / n as f64)
                .collect()
        })
    }

    pub fn reward_mean(&self, s: usize, a: usize) -> Option<f64> {
        let n = self.visits(s, a);
        (n > 0).then(|| self.reward_sum[self.idx(s, a)] / n as f64)
    }

    /// Biased sample variance `(Σr² - (Σr)²/n) / n`, clamped at zero.
    pub fn reward_variance(&self, s: usize, a: usize) -> Option<f64> {
        let n = self.visits(s, a);
        let i = self.idx(s, a);
        (n > 0).then(|| {
            let nf = n as f64;
            ((self.reward_sq_sum[i] - self.reward_sum[i] * self.reward_sum[i] / nf) / nf).max(0.0)
        })
    }

    /// Checks table shapes, count conservation and moment consistency.
    pub fn validate(&self) -> Result<()> {
        let sa = self.num_states * self.num_actions;
        if self.visits.len() != sa
            || self.trans_counts.len() != sa * self.num_states
            || self.reward_sum.len() != sa
            || self.reward_sq_sum.len() != sa
        {
            return Err(Error::InvalidState("table shapes do not match S and A".into()));
        }
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let i = self.idx(s, a);
                let n = self.visits[i];
                let total: u64 = self.transition_counts(s, a).iter().sum();
                if total != n {
                    return Err(Error::InvalidState(format!(
                        "pair ({s},{a}): transition counts sum to {total}, visits are {n}"
                    )));
                }
                let (sum, sq) = (self.reward_sum[i], self.reward_sq_sum[i]);
                let nf = n as f64;
                if n == 0 && (sum != 0.0 || sq != 0.0) {
                    return Err(Error::InvalidState(format!(
                        "pair ({s},{a}) has rewards but no visits"
                    )));
                }
                if n > 0 && (sum < 0.0 || sum > nf || sq < sum * sum / nf - 1e-9 * nf) {
                    return Err(Error::InvalidState(format!(
                        "pair ({s},{a}): reward moments inconsistent with [0, 1] samples"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Upper and lower value tables with the greedy policy of the upper one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueBracket {
    pub upper: ValueTable,
    pub lower: ValueTable,
    pub policy: PolicyTable,
}

impl ValueBracket {
    /// Greedy action at state `s`, timestep `t ∈ [1, H]`.
    pub fn act(&self, s: usize, t: usize) -> Result<usize> {
        if s >= self.policy.num_states() || t == 0 || t > self.policy.horizon() {
            return Err(Error::InvalidArgument(format!(
                "(s={s}, t={t}) outside the policy table"
            )));
        }
        Ok(self.policy.action(s, t))
    }

    /// True when `lower - tol <= values <= upper + tol` at every `(t, s)`.
    pub fn contains(&self, values: &ValueTable, tol: f64) -> bool {
        let h = self.upper.horizon();
        (1..=h + 1).all(|t| {
            let (lo, hi, v) = (self.lower.row(t), self.upper.row(t), values.row(t));
            (0..v.len()).all(|s| lo[s] - tol <= v[s] && v[s] <= hi[s] + tol)
        })
    }

    /// Weighted mean of `V̄_1 - V̲_1`; uniform weights when `None`.
    pub fn width(&self, weights: Option<&[f64]>) -> f64 {
        let (up, lo) = (self.upper.row(1), self.lower.row(1));
        let n = up.len();
        let gap = |s: usize| up[s] - lo[s];
        match weights {
            Some(w) => w.iter().enumerate().map(|(s, w)| w * gap(s)).sum(),
            None => (0..n).map(gap).sum::<f64>() / n as f64,
        }
    }
}

/// Free-function form of [`ValueBracket::width`].
pub fn bracket_width(bracket: &ValueBracket, weights: Option<&[f64]>) -> f64 {
    bracket.width(weights)
}

/// Per-pair quantities that do not depend on the timestep.
struct PairEstimate {
    n: u64,
    p_hat: Vec<f64>,
    reward: f64,
    reward_bonus: f64,
}

fn dot(p: &[f64], v: &[f64]) -> f64 {
    p.iter().zip(v).map(|(p, v)| p * v).sum()
}

/// Backward induction producing the upper/lower bracket and greedy policy.
///
/// Unvisited pairs get `Q = cap` and contribute `0` to the lower table.
/// Argmax ties go to the lowest action index. `q_cap`, when set, further
/// caps every upper Q-value (bounded-return setting).
pub fn plan(
    stats: &SufficientStats,
    horizon: usize,
    ci: &dyn ConfidenceInterval,
    q_cap: Option<f64>,
) -> Result<ValueBracket> {
    stats.validate()?;
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let (n_s, n_a) = (stats.num_states(), stats.num_actions());

    let pairs: Vec<PairEstimate> = (0..n_s)
        .flat_map(|s| (0..n_a).map(move |a| (s, a)))
        .map(|(s, a)| {
            let n = stats.visits(s, a);
            match stats.p_hat(s, a) {
                Some(p_hat) => {
                    let var = stats.reward_variance(s, a).unwrap_or(0.0);
                    PairEstimate {
                        n,
                        p_hat,
                        reward: stats.reward_mean(s, a).unwrap_or(0.0),
                        reward_bonus: ci.reward_bonus(var, n),
                    }
                }
                None => PairEstimate {
                    n: 0,
                    p_hat: Vec::new(),
                    reward: 0.0,
                    reward_bonus: 0.0,
                },
            }
        })
        .collect();

    let mut upper = ValueTable::zeros(n_s, horizon);
    let mut lower = ValueTable::zeros(n_s, horizon);
    let mut policy = PolicyTable::constant(n_s, horizon, 0);
    let mut gap = vec![0.0; n_s];

    for t in (1..=horizon).rev() {
        let next_up = upper.row(t + 1).to_vec();
        let next_lo = lower.row(t + 1).to_vec();
        for (g, (u, l)) in gap.iter_mut().zip(next_up.iter().zip(&next_lo)) {
            *g = u - l;
        }
        let mut cap = (horizon - t + 1) as f64;
        if let Some(c) = q_cap {
            cap = cap.min(c);
        }

        for s in 0..n_s {
            let mut best = (0usize, f64::NEG_INFINITY);
            for a in 0..n_a {
                let e = &pairs[s * n_a + a];
                let q = if e.n == 0 {
                    cap
                } else {
                    let norm = weighted_two_norm(&e.p_hat, &gap)?;
                    let bonus = ci.transition_bonus(&e.p_hat, &next_up, e.n, norm);
                    cap.min(e.reward + e.reward_bonus + dot(&e.p_hat, &next_up) + bonus)
                };
                if q > best.1 {
                    best = (a, q);
                }
            }
            let (a, q) = best;
            upper.set(t, s, q);
            policy.set(s, t, a);

            let e = &pairs[s * n_a + a];
            let lo = if e.n == 0 {
                0.0
            } else {
                let norm = weighted_two_norm(&e.p_hat, &gap)?;
                let bonus = ci.transition_bonus(&e.p_hat, &next_lo, e.n, norm);
                (e.reward - e.reward_bonus + dot(&e.p_hat, &next_lo) - bonus).max(0.0)
            };
            // only binds when q_cap is below the true value scale
            lower.set(t, s, lo.min(q));
        }
    }
    Ok(ValueBracket {
        upper,
        lower,
        policy,
    })
}

/// An agent instance: statistics plus a fixed confidence interval.
pub struct Euler {
    stats: SufficientStats,
    horizon: usize,
    ci: Box<dyn ConfidenceInterval>,
    q_cap: Option<f64>,
}

impl Euler {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        ci: Box<dyn ConfidenceInterval>,
    ) -> Self {
        Self {
            stats: SufficientStats::new(num_states, num_actions),
            horizon,
            ci,
            q_cap: None,
        }
    }

    pub fn with_q_cap(mut self, q_cap: Option<f64>) -> Self {
        self.q_cap = q_cap;
        self
    }

    pub fn plan(&self) -> Result<ValueBracket> {
        plan(&self.stats, self.horizon, self.ci.as_ref(), self.q_cap)
    }

    pub fn observe(&mut self, s: usize, a: usize, r: f64, s_next: usize) -> Result<()> {
        self.stats.observe(s, a, r, s_next)
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn confidence_interval(&self) -> &dyn ConfidenceInterval {
        self.ci.as_ref()
    }
}
