//! Exact backward induction.

use super::{PolicyTable, TabularMDP, ValueTable};
use crate::error::Result;

/// `r̄(s,a) + p(s,a)ᵀ next`.
pub fn q_value(mdp: &TabularMDP, next: &[f64], s: usize, a: usize) -> f64 {
    let expected: f64 = mdp
        .transition(s, a)
        .iter()
        .zip(next)
        .map(|(p, v)| p * v)
        .sum();
    mdp.reward(s, a).mean() + expected
}

/// Optimal values and a greedy optimal policy. Ties go to the lowest action index.
pub fn optimal_values(mdp: &TabularMDP) -> (ValueTable, PolicyTable) {
    let (n_s, n_a, h) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut values = ValueTable::zeros(n_s, h);
    let mut policy = PolicyTable::constant(n_s, h, 0);
    for t in (1..=h).rev() {
        let next = values.row(t + 1).to_vec();
        for s in 0..n_s {
            let mut best = (0, q_value(mdp, &next, s, 0));
            for a in 1..n_a {
                let q = q_value(mdp, &next, s, a);
                if q > best.1 {
                    best = (a, q);
                }
            }
            values.set(t, s, best.1);
            policy.set(s, t, best.0);
        }
    }
    (values, policy)
}

/// Exact value of a fixed policy.
pub fn policy_values(mdp: &TabularMDP, policy: &PolicyTable) -> Result<ValueTable> {
    policy.validate(mdp.num_actions())?;
    let (n_s, h) = (mdp.num_states(), mdp.horizon());
    let mut values = ValueTable::zeros(n_s, h);
    for t in (1..=h).rev() {
        let next = values.row(t + 1).to_vec();
        for s in 0..n_s {
            let q = q_value(mdp, &next, s, policy.action(s, t));
            values.set(t, s, q);
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::RewardDist;

    fn det(v: f64) -> RewardDist {
        RewardDist::Deterministic { value: v }
    }

    #[test]
    fn self_loop_counts_down() {
        let mdp = TabularMDP::new(3, vec![vec![vec![1.0]]], vec![vec![det(1.0)]], vec![1.0]).unwrap();
        let (v, pi) = optimal_values(&mdp);
        assert_eq!(v.get(1, 0), 3.0);
        assert_eq!(v.get(2, 0), 2.0);
        assert_eq!(v.get(3, 0), 1.0);
        assert_eq!(v.get(4, 0), 0.0);
        assert_eq!(pi.action(0, 1), 0);
    }

    #[test]
    fn one_step_takes_best_mean() {
        let mdp = TabularMDP::new(
            1,
            vec![vec![vec![0.5, 0.5]; 3]; 2],
            vec![
                vec![det(0.2), RewardDist::Bernoulli { mean: 0.7 }, det(0.1)],
                vec![det(0.9), det(0.9), det(0.3)],
            ],
            vec![1.0, 0.0],
        )
        .unwrap();
        let (v, pi) = optimal_values(&mdp);
        assert_eq!(v.get(1, 0), 0.7);
        assert_eq!(v.get(1, 1), 0.9);
        assert_eq!(pi.action(0, 1), 1);
        // tie between actions 0 and 1 goes to 0
        assert_eq!(pi.action(1, 1), 0);
    }

    #[test]
    fn optimal_policy_evaluates_to_optimal_values() {
        let mdp = TabularMDP::new(
            4,
            vec![
                vec![vec![0.3, 0.7], vec![1.0, 0.0]],
                vec![vec![0.0, 1.0], vec![0.6, 0.4]],
            ],
            vec![
                vec![det(0.1), RewardDist::Bernoulli { mean: 0.4 }],
                vec![det(0.5), det(0.0)],
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let (v, pi) = optimal_values(&mdp);
        let vp = policy_values(&mdp, &pi).unwrap();
        assert!(v.max_abs_diff(&vp) <= 1e-12);
    }

    #[test]
    fn identical_actions_make_policy_irrelevant() {
        let row = vec![0.25, 0.75];
        let mdp = TabularMDP::new(
            3,
            vec![vec![row.clone(), row.clone()], vec![row.clone(), row]],
            vec![vec![det(0.3), det(0.3)], vec![det(0.8), det(0.8)]],
            vec![1.0, 0.0],
        )
        .unwrap();
        let a = policy_values(&mdp, &PolicyTable::constant(2, 3, 0)).unwrap();
        let b = policy_values(&mdp, &PolicyTable::from_fn(2, 3, |s, t| (s + t) % 2)).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-15);
    }

    #[test]
    fn rejects_out_of_range_policy() {
        let mdp = TabularMDP::new(1, vec![vec![vec![1.0]]], vec![vec![det(1.0)]], vec![1.0]).unwrap();
        assert!(policy_values(&mdp, &PolicyTable::constant(1, 1, 1)).is_err());
    }
}
