//! Head-to-head: Bernstein bonuses against the Hoeffding-style baseline.

use euler_rl::env::EnvSpec;
use euler_rl::harness::{compare, Algorithm, ExperimentConfig};

fn main() -> euler_rl::Result<()> {
    let arm = |algorithm| ExperimentConfig::new(EnvSpec::Chain { n: 10 }, algorithm, 10_000, 0.05, 0);
    let seeds: Vec<u64> = (1..=10).collect();
    let c = compare(
        &[arm(Algorithm::EulerBernstein), arm(Algorithm::EulerHoeffdingBaseline)],
        &seeds,
    )?;
    for a in &c.arms {
        println!("{:26} median regret {:.2}", a.algorithm.name(), a.median_regret);
    }
    println!(
        "leading terms: problem-dependent {:.1}, max-return {:.1}, worst case {:.1}",
        c.bounds.problem_dependent, c.bounds.max_return, c.bounds.worst_case
    );
    Ok(())
}
