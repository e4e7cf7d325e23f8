//! Plugging a user-defined confidence interval into the planner and
//! driving the episode loop by hand.

use euler_rl::agent::Euler;
use euler_rl::concentration::variance_under;
use euler_rl::env::{sample_start, step, EnvSpec};
use euler_rl::mdp::{optimal_values, policy_values};
use euler_rl::rng::episode_stream;
use euler_rl::{BonusConstants, ConfidenceInterval};

/// Bernstein leading term with a smaller lower-order cap.
struct Tight {
    c: BonusConstants,
}

impl ConfidenceInterval for Tight {
    fn name(&self) -> &'static str {
        "tight"
    }
    fn g(&self, p: &[f64], v: &[f64]) -> f64 {
        (2.0 * variance_under(p, v).unwrap_or(0.0) * self.c.log_factor).sqrt()
    }
    fn j(&self) -> f64 {
        self.c.horizon as f64
    }
    fn b_v(&self) -> f64 {
        self.c.b_v
    }
    fn b_p(&self) -> f64 {
        self.c.horizon as f64
    }
    fn reward_bonus(&self, var: f64, n: u64) -> f64 {
        (2.0 * var * self.c.log_factor / n as f64).sqrt() + self.c.log_factor / n as f64
    }
}

fn main() -> euler_rl::Result<()> {
    let mdp = EnvSpec::Chain { n: 6 }.build()?;
    let (h, k) = (mdp.horizon(), 3000u64);
    let c = BonusConstants::new(mdp.num_states(), mdp.num_actions(), h, k, 0.05)?;
    let mut agent = Euler::new(mdp.num_states(), mdp.num_actions(), h, Box::new(Tight { c }));
    let (v_star, _) = optimal_values(&mdp);
    let mut regret = 0.0;
    for episode in 1..=k {
        let bracket = agent.plan()?;
        let mut rng = episode_stream(7, episode);
        let mut s = sample_start(&mdp, &mut rng);
        regret += v_star.get(1, s) - policy_values(&mdp, &bracket.policy)?.get(1, s);
        for t in 1..=h {
            let a = bracket.act(s, t)?;
            let (next, r) = step(&mdp, s, a, &mut rng);
            agent.observe(s, a, r, next)?;
            s = next;
        }
        if episode % 500 == 0 {
            println!("k={episode:5} regret {regret:.2}");
        }
    }
    Ok(())
}
