//! Regret curve of the Bernstein learner on the stochastic chain.

use euler_rl::env::EnvSpec;
use euler_rl::harness::{run_experiment, Algorithm, ExperimentConfig};

fn main() -> euler_rl::Result<()> {
    let cfg = ExperimentConfig::new(EnvSpec::Chain { n: 6 }, Algorithm::EulerBernstein, 5000, 0.05, 1);
    let r = run_experiment(&cfg)?;
    println!("V*(s1) = {:.4}", r.optimal_start_values[0]);
    for k in [100, 500, 1000, 2000, 3000, 4000, 5000] {
        let row = &r.trace.rows[k as usize - 1];
        println!(
            "k={k:5} regret={:9.3} per-episode={:.4} bracket width={:.3}",
            row.cumulative_regret,
            row.cumulative_regret / k as f64,
            row.bracket_width
        );
    }
    Ok(())
}
