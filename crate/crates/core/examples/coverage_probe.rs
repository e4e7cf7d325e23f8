//! Monte-Carlo check of the confidence intervals' failure rates.

use euler_rl::concentration::{coverage_probe, CoverageInterval, CoverageTarget};
use euler_rl::{BonusConstants, RewardDist};

fn main() -> euler_rl::Result<()> {
    let c = BonusConstants::new(3, 2, 4, 1000, 0.1)?;
    println!("delta' = {:.5}, log factor = {:.3}", c.delta_prime, c.log_factor);
    let transition = CoverageTarget::Transition {
        p: vec![0.2, 0.3, 0.5],
        values: vec![0.0, 2.0, 4.0],
    };
    let reward = CoverageTarget::Reward(RewardDist::Bernoulli { mean: 0.3 });
    for n in [5, 20, 100] {
        let t = coverage_probe(&transition, CoverageInterval::Bernstein, 10_000, n, &c, 1)?;
        let r = coverage_probe(&reward, CoverageInterval::EmpiricalBernstein, 10_000, n, &c, 2)?;
        let naive = coverage_probe(&reward, CoverageInterval::Fixed(0.05), 10_000, n, &c, 3)?;
        println!("n={n:3} transition {t:.4} reward {r:.4} fixed width 0.05: {naive:.4}");
    }
    Ok(())
}
