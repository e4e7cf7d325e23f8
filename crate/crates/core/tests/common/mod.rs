#![allow(dead_code)]

use euler_rl::TabularMDP;

/// `values[t][s]` for `t = 0..=H` (0-based, last row zero) of a policy given
/// as `policy(s, t)` with 0-based `t`.
pub fn evaluate(mdp: &TabularMDP, policy: impl Fn(usize, usize) -> usize) -> Vec<Vec<f64>> {
    let (n_s, h) = (mdp.num_states(), mdp.horizon());
    let mut values = vec![vec![0.0; n_s]; h + 1];
    for t in (0..h).rev() {
        for s in 0..n_s {
            let a = policy(s, t);
            let p = mdp.transition(s, a);
            let tail: f64 = (0..n_s).map(|j| p[j] * values[t + 1][j]).sum();
            values[t][s] = mdp.reward(s, a).mean() + tail;
        }
    }
    values
}

/// Pointwise maximum over every deterministic Markov policy.
pub fn brute_force_optimal(mdp: &TabularMDP) -> Vec<Vec<f64>> {
    let (n_s, n_a, h) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let slots = n_s * h;
    let count = (n_a as u64).pow(slots as u32);
    let mut best = vec![vec![f64::NEG_INFINITY; n_s]; h + 1];
    for code in 0..count {
        let digit = |s: usize, t: usize| ((code / (n_a as u64).pow((t * n_s + s) as u32)) % n_a as u64) as usize;
        let v = evaluate(mdp, digit);
        for t in 0..=h {
            for s in 0..n_s {
                best[t][s] = best[t][s].max(v[t][s]);
            }
        }
    }
    best
}

/// Plain backward induction, `values[t][s]` 0-based.
pub fn backward_optimal(mdp: &TabularMDP) -> Vec<Vec<f64>> {
    let (n_s, n_a, h) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut values = vec![vec![0.0; n_s]; h + 1];
    for t in (0..h).rev() {
        for s in 0..n_s {
            values[t][s] = (0..n_a)
                .map(|a| {
                    let p = mdp.transition(s, a);
                    mdp.reward(s, a).mean() + (0..n_s).map(|j| p[j] * values[t + 1][j]).sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }
    values
}

/// Environmental norm from a 0-based value table.
pub fn norm_from(mdp: &TabularMDP, values: &[Vec<f64>]) -> f64 {
    let (n_s, n_a, h) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut worst = 0.0f64;
    for t in 0..h {
        let next = &values[t + 1];
        for s in 0..n_s {
            for a in 0..n_a {
                let p = mdp.transition(s, a);
                let mean: f64 = (0..n_s).map(|j| p[j] * next[j]).sum();
                let var: f64 = (0..n_s).map(|j| p[j] * (next[j] - mean).powi(2)).sum();
                worst = worst.max(mdp.reward(s, a).variance() + var);
            }
        }
    }
    worst
}
