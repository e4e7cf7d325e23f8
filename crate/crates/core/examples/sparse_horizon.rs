//! Bounded-return setting: regret on a combination lock as the horizon grows.

use euler_rl::env::EnvSpec;
use euler_rl::harness::{run_experiment, Algorithm, ExperimentConfig};

fn main() -> euler_rl::Result<()> {
    for horizon in [5, 10, 20] {
        let env = EnvSpec::SparseReward {
            horizon,
            states: 6,
            actions: 3,
            goal_state: 4,
        };
        let mut total = 0.0;
        for seed in 1..=5 {
            let cfg = ExperimentConfig::new(env.clone(), Algorithm::EulerBernstein, 5000, 0.05, seed);
            total += run_experiment(&cfg)?.trace.final_regret();
        }
        println!("H={horizon:2} mean final regret {:.1}", total / 5.0);
    }
    Ok(())
}
