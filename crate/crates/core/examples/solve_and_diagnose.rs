//! Exact optimal values and hardness diagnostics of the chain benchmark.

use euler_rl::env::EnvSpec;
use euler_rl::mdp::{diagnose, optimal_values, theoretical_bounds};

fn main() -> euler_rl::Result<()> {
    for n in [4, 8, 16] {
        let mdp = EnvSpec::Chain { n }.build()?;
        let (v, pi) = optimal_values(&mdp);
        let d = diagnose(&mdp);
        let b = theoretical_bounds(&mdp, 10_000, 0.05);
        println!(
            "chain N={n:2}: V*(s1)={:.4} first action={} Q*={:.4} G={} succ-range={:.4}",
            v.get(1, 0),
            pi.action(0, 1),
            d.environmental_norm,
            d.max_return,
            d.successor_range
        );
        println!(
            "             leading terms at K=1e4: problem-dependent {:.1}, worst case {:.1}",
            b.problem_dependent, b.worst_case
        );
    }
    Ok(())
}
