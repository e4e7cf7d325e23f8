//! Confidence intervals used by the exploration bonuses.
//!
//! A confidence interval on the transition dynamics has the form
//! `phi(p, V, n) = g(p, V) / sqrt(n) + j / n`. It is admissible when
//! `g(p, c·1) = 0` for every constant `c` and `g` is `B_v`-Lipschitz in `V`
//! under the `p`-weighted 2-norm; the planner then restores optimism for
//! estimated inputs with the correction `(4J + B_p)/n + B_v ||V̄ - V̲||/sqrt(n)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::RewardDist;
use crate::rng::{sample_categorical, stream, PROBE_STREAM};

/// Frozen constants shared by every bonus of a run.
///
/// A single log factor `L = ln(4 S A T / δ')` with `δ' = δ/7` and
/// `T = K H` is used in every formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BonusConstants {
    pub delta: f64,
    pub delta_prime: f64,
    pub log_factor: f64,
    /// `H sqrt(2L)`.
    pub b_p: f64,
    /// `sqrt(2L)`.
    pub b_v: f64,
    /// `H L / 3`.
    pub j: f64,
    pub horizon: usize,
    pub num_states: usize,
    pub num_actions: usize,
    /// `T = K H`; a run of zero episodes is treated as `K = 1`.
    pub total_steps: u64,
}

impl BonusConstants {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        episodes: u64,
        delta: f64,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(Error::InvalidArgument(
                "S, A and H must be positive".into(),
            ));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!("delta {delta} outside (0, 1)")));
        }
        let total_steps = episodes.max(1) * horizon as u64;
        let delta_prime = delta / 7.0;
        let log_factor =
            (4.0 * num_states as f64 * num_actions as f64 * total_steps as f64 / delta_prime).ln();
        let h = horizon as f64;
        Ok(Self {
            delta,
            delta_prime,
            log_factor,
            b_p: h * (2.0 * log_factor).sqrt(),
            b_v: (2.0 * log_factor).sqrt(),
            j: h * log_factor / 3.0,
            horizon,
            num_states,
            num_actions,
            total_steps,
        })
    }
}

fn check_dims(p: &[f64], x: &[f64]) -> Result<()> {
    if p.len() != x.len() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: p has {} entries, x has {}",
            p.len(),
            x.len()
        )));
    }
    Ok(())
}

/// `sqrt(sum_i p_i x_i^2)`.
pub fn weighted_two_norm(p: &[f64], x: &[f64]) -> Result<f64> {
    check_dims(p, x)?;
    Ok(p.iter().zip(x).map(|(p, x)| p * x * x).sum::<f64>().sqrt())
}

/// Variance of `x` under `p`.
///
/// Values are shifted by `x[0]` first, so a constant vector gives exactly 0.
pub fn variance_under(p: &[f64], x: &[f64]) -> Result<f64> {
    check_dims(p, x)?;
    let Some(&origin) = x.first() else {
        return Ok(0.0);
    };
    let mean: f64 = p.iter().zip(x).map(|(p, x)| p * (x - origin)).sum();
    Ok(p.iter()
        .zip(x)
        .map(|(p, x)| p * (x - origin - mean).powi(2))
        .sum())
}

fn check_count(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("visit count must be at least 1".into()));
    }
    Ok(n as f64)
}

/// Bernstein width for `(p̂ - p)ᵀV`: `sqrt(2 Var_p(V) L / n) + H L / (3n)`.
pub fn bernstein_phi(p: &[f64], v: &[f64], n: u64, c: &BonusConstants) -> Result<f64> {
    let n = check_count(n)?;
    let var = variance_under(p, v)?;
    Ok((2.0 * var * c.log_factor / n).sqrt() + c.horizon as f64 * c.log_factor / (3.0 * n))
}

/// Empirical-Bernstein reward width: `sqrt(2 V̂ar L / n) + 7 L / (3n)`.
pub fn reward_bonus(sample_variance: f64, n: u64, c: &BonusConstants) -> Result<f64> {
    let n = check_count(n)?;
    if !(sample_variance >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sample variance {sample_variance} is negative"
        )));
    }
    Ok((2.0 * sample_variance * c.log_factor / n).sqrt() + 7.0 * c.log_factor / (3.0 * n))
}

/// `phi + (4J + B_p)/n + B_v · bracket_norm / sqrt(n)`.
pub fn transition_bonus(phi_value: f64, n: u64, bracket_norm: f64, c: &BonusConstants) -> Result<f64> {
    let n = check_count(n)?;
    if !(bracket_norm >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bracket norm {bracket_norm} is negative"
        )));
    }
    Ok(phi_value + (4.0 * c.j + c.b_p) / n + c.b_v * bracket_norm / n.sqrt())
}

/// Worst-case Hoeffding width `H sqrt(L / (2n))`, independent of `p` and `V`.
pub fn hoeffding_phi(n: u64, c: &BonusConstants) -> Result<f64> {
    let n = check_count(n)?;
    Ok(c.horizon as f64 * (c.log_factor / (2.0 * n)).sqrt())
}

/// A pluggable confidence interval for the planner.
///
/// Implementations provide the leading coefficient `g`, the lower-order
/// numerator `j`, and the Lipschitz constants `B_v`, `B_p`. The planner only
/// calls [`ConfidenceInterval::transition_bonus`] and
/// [`ConfidenceInterval::reward_bonus`]; both have default forms in terms of
/// the four primitives.
pub trait ConfidenceInterval: Send + Sync {
    fn name(&self) -> &'static str;

    /// Leading coefficient `g(p, V)`.
    fn g(&self, p: &[f64], v: &[f64]) -> f64;

    /// Lower-order numerator; also the cap `J` in the correction term.
    fn j(&self) -> f64;

    fn b_v(&self) -> f64;

    fn b_p(&self) -> f64;

    /// Reward width for `n >= 1` samples with the given sample variance.
    fn reward_bonus(&self, sample_variance: f64, n: u64) -> f64;

    /// `g(p, V)/sqrt(n) + j/n`, `n >= 1`.
    fn phi(&self, p: &[f64], v: &[f64], n: u64) -> f64 {
        let n = n as f64;
        self.g(p, v) / n.sqrt() + self.j() / n
    }

    /// Optimistic transition bonus with correction for estimated inputs.
    fn transition_bonus(&self, p_hat: &[f64], v: &[f64], n: u64, bracket_norm: f64) -> f64 {
        let nf = n as f64;
        self.phi(p_hat, v, n) + (4.0 * self.j() + self.b_p()) / nf + self.b_v() * bracket_norm / nf.sqrt()
    }
}

/// Bernstein interval on transitions plus empirical Bernstein on rewards.
#[derive(Debug, Clone, Copy)]
pub struct Bernstein {
    pub constants: BonusConstants,
}

impl ConfidenceInterval for Bernstein {
    fn name(&self) -> &'static str {
        "euler_bernstein"
    }

    fn g(&self, p: &[f64], v: &[f64]) -> f64 {
        let var = variance_under(p, v).expect("planner passes matching dimensions");
        (2.0 * var * self.constants.log_factor).sqrt()
    }

    fn j(&self) -> f64 {
        self.constants.j
    }

    fn b_v(&self) -> f64 {
        self.constants.b_v
    }

    fn b_p(&self) -> f64 {
        self.constants.b_p
    }

    fn reward_bonus(&self, sample_variance: f64, n: u64) -> f64 {
        reward_bonus(sample_variance.max(0.0), n, &self.constants)
            .expect("planner only evaluates visited pairs")
    }
}

/// Worst-case baseline: Hoeffding on rewards and on `(p̂ - p)ᵀV` for `V` in `[0, H]`.
///
/// Its width ignores `p` and `V`, so it needs no correction: `B_v = B_p = J = 0`.
/// It does not satisfy `g(p, c·1) = 0` and is not admissible in the
/// bracket sense; it exists for head-to-head regret comparisons.
#[derive(Debug, Clone, Copy)]
pub struct Hoeffding {
    pub constants: BonusConstants,
}

impl ConfidenceInterval for Hoeffding {
    fn name(&self) -> &'static str {
        "euler_hoeffding_baseline"
    }

    fn g(&self, _p: &[f64], _v: &[f64]) -> f64 {
        self.constants.horizon as f64 * (self.constants.log_factor / 2.0).sqrt()
    }

    fn j(&self) -> f64 {
        0.0
    }

    fn b_v(&self) -> f64 {
        0.0
    }

    fn b_p(&self) -> f64 {
        0.0
    }

    fn reward_bonus(&self, _sample_variance: f64, n: u64) -> f64 {
        (self.constants.log_factor / (2.0 * n as f64)).sqrt()
    }
}

/// Quantity whose estimate a coverage probe checks.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverageTarget {
    /// `pᵀV` estimated from `n` next-state draws.
    Transition { p: Vec<f64>, values: Vec<f64> },
    /// Reward mean estimated from `n` reward draws.
    Reward(RewardDist),
}

/// Interval tested by a coverage probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoverageInterval {
    /// [`bernstein_phi`] at the true `p` (transition targets).
    Bernstein,
    /// [`reward_bonus`] at the sample variance (reward targets).
    EmpiricalBernstein,
    /// Fixed half-width.
    Fixed(f64),
}

/// Fraction of `trials` in which the estimate from `n` samples misses the
/// truth by more than the interval half-width.
pub fn coverage_probe(
    target: &CoverageTarget,
    interval: CoverageInterval,
    trials: u64,
    n: u64,
    c: &BonusConstants,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    check_count(n)?;
    let mut rng = stream(seed, PROBE_STREAM);
    let mut failures = 0u64;
    match target {
        CoverageTarget::Transition { p, values } => {
            check_dims(p, values)?;
            let width = match interval {
                CoverageInterval::Bernstein => bernstein_phi(p, values, n, c)?,
                CoverageInterval::Fixed(w) => w,
                CoverageInterval::EmpiricalBernstein => {
                    return Err(Error::InvalidArgument(
                        "empirical-Bernstein interval applies to reward targets".into(),
                    ))
                }
            };
            let truth: f64 = p.iter().zip(values).map(|(p, v)| p * v).sum();
            for _ in 0..trials {
                let mut sum = 0.0;
                for _ in 0..n {
                    sum += values[sample_categorical(p, &mut rng)];
                }
                if (sum / n as f64 - truth).abs() > width {
                    failures += 1;
                }
            }
        }
        CoverageTarget::Reward(dist) => {
            let truth = dist.mean();
            for _ in 0..trials {
                let (mut sum, mut sq) = (0.0, 0.0);
                for _ in 0..n {
                    let r = sample_reward(dist, &mut rng);
                    sum += r;
                    sq += r * r;
                }
                let nf = n as f64;
                let width = match interval {
                    CoverageInterval::EmpiricalBernstein => {
                        let var = ((sq - sum * sum / nf) / nf).max(0.0);
                        reward_bonus(var, n, c)?
                    }
                    CoverageInterval::Fixed(w) => w,
                    CoverageInterval::Bernstein => {
                        return Err(Error::InvalidArgument(
                            "Bernstein transition interval applies to transition targets".into(),
                        ))
                    }
                };
                if (sum / nf - truth).abs() > width {
                    failures += 1;
                }
            }
        }
    }
    Ok(failures as f64 / trials as f64)
}

pub(crate) fn sample_reward<R: Rng + ?Sized>(dist: &RewardDist, rng: &mut R) -> f64 {
    match *dist {
        RewardDist::Deterministic { value } => value,
        RewardDist::Bernoulli { mean } => {
            if rng.random::<f64>() < mean {
                1.0
            } else {
                0.0
            }
        }
    }
}
