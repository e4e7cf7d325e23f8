//! Regret growth on a fully deterministic chain.

use euler_rl::env::EnvSpec;
use euler_rl::harness::{run_experiment, Algorithm, ExperimentConfig};

fn main() -> euler_rl::Result<()> {
    let k = 20_000;
    let cfg = ExperimentConfig::new(EnvSpec::DeterministicChain { states: 5 }, Algorithm::EulerBernstein, k, 0.05, 1);
    let r = run_experiment(&cfg)?;
    let last = r.trace.rows.iter().rposition(|x| x.instant_regret > 0.0).map_or(0, |i| i + 1);
    println!("environmental norm: {}", r.diagnostics.environmental_norm);
    for k in [200u64, 1000, 2000, 5000, 10_000, 20_000] {
        println!("k={k:6} cumulative regret {:.2}", r.trace.regret_at(k));
    }
    println!("last episode with positive regret: {last}");
    Ok(())
}
