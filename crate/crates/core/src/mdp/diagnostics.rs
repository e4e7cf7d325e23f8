//! Problem-dependent hardness measures computed from the true model.

use serde::{Deserialize, Serialize};

use super::{optimal_values, TabularMDP, ValueTable};
use crate::concentration::variance_under;

/// Hardness measures of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Max over `(s,a,t)` of reward variance plus next-state variance of `V*_{t+1}`.
    pub environmental_norm: f64,
    /// Deterministic ceiling on the return of any realizable episode.
    pub max_return: f64,
    /// Max over `(s,a,t)` of the range of `V*_{t+1}` over the successors of `(s,a)`.
    pub successor_range: f64,
    /// `max_s V*_1(s) - min_s V*_1(s)`.
    pub value_range: f64,
}

pub fn diagnose(mdp: &TabularMDP) -> Diagnostics {
    let (v, _) = optimal_values(mdp);
    Diagnostics {
        environmental_norm: environmental_norm_with(mdp, &v),
        max_return: max_return(mdp),
        successor_range: successor_range_with(mdp, &v),
        value_range: value_range_with(&v),
    }
}

pub fn environmental_norm(mdp: &TabularMDP) -> f64 {
    let (v, _) = optimal_values(mdp);
    environmental_norm_with(mdp, &v)
}

fn environmental_norm_with(mdp: &TabularMDP, v: &ValueTable) -> f64 {
    let mut worst = 0.0f64;
    for t in 1..=mdp.horizon() {
        let next = v.row(t + 1);
        for s in 0..mdp.num_states() {
            for a in 0..mdp.num_actions() {
                let var_next = variance_under(mdp.transition(s, a), next)
                    .expect("rows and value tables share the state count");
                worst = worst.max(mdp.reward(s, a).variance() + var_next);
            }
        }
    }
    worst
}

/// Backward DP over support maxima:
/// `M_t(s) = max_a [r_max(s,a) + max_{s' in supp p(s,a)} M_{t+1}(s')]`.
pub fn max_return(mdp: &TabularMDP) -> f64 {
    let n_s = mdp.num_states();
    let mut next = vec![0.0; n_s];
    for _ in 0..mdp.horizon() {
        let cur: Vec<f64> = (0..n_s)
            .map(|s| {
                (0..mdp.num_actions())
                    .map(|a| {
                        let tail = mdp.support(s, a).map(|s2| next[s2]).fold(0.0, f64::max);
                        mdp.reward(s, a).max_value() + tail
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        next = cur;
    }
    next.into_iter().fold(0.0, f64::max)
}

pub fn successor_range(mdp: &TabularMDP) -> f64 {
    let (v, _) = optimal_values(mdp);
    successor_range_with(mdp, &v)
}

fn successor_range_with(mdp: &TabularMDP, v: &ValueTable) -> f64 {
    let mut worst = 0.0f64;
    for t in 1..=mdp.horizon() {
        let next = v.row(t + 1);
        for s in 0..mdp.num_states() {
            for a in 0..mdp.num_actions() {
                let (lo, hi) = mdp
                    .support(s, a)
                    .map(|s2| next[s2])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                        (lo.min(x), hi.max(x))
                    });
                worst = worst.max(hi - lo);
            }
        }
    }
    worst
}

pub fn value_range(mdp: &TabularMDP) -> f64 {
    let (v, _) = optimal_values(mdp);
    value_range_with(&v)
}

fn value_range_with(v: &ValueTable) -> f64 {
    let row = v.row(1);
    let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Leading regret terms with constants and log factors dropped.
///
/// These are plotting overlays, not certified bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalBounds {
    /// `sqrt(Q* S A T)`.
    pub problem_dependent: f64,
    /// `sqrt(G^2 S A T / H)`, i.e. `G sqrt(S A K)`.
    pub max_return: f64,
    /// `sqrt(H S A T)`.
    pub worst_case: f64,
}

/// Leading terms for `episodes` episodes, `T = episodes * H`.
///
/// `delta` only enters the dropped log factors; it is accepted so callers
/// can pass the run configuration through unchanged.
pub fn theoretical_bounds(mdp: &TabularMDP, episodes: u64, _delta: f64) -> TheoreticalBounds {
    bounds_from(mdp, &diagnose(mdp), episodes)
}

pub(crate) fn bounds_from(mdp: &TabularMDP, d: &Diagnostics, episodes: u64) -> TheoreticalBounds {
    let h = mdp.horizon() as f64;
    let sa = (mdp.num_states() * mdp.num_actions()) as f64;
    let t = episodes as f64 * h;
    TheoreticalBounds {
        problem_dependent: (d.environmental_norm * sa * t).sqrt(),
        max_return: (d.max_return * d.max_return * sa * t / h).sqrt(),
        worst_case: (h * sa * t).sqrt(),
    }
}
