//! Dumping and reloading models, statistics and brackets as JSON.

use euler_rl::agent::{Euler, SufficientStats, ValueBracket};
use euler_rl::env::{sample_start, step, EnvSpec};
use euler_rl::rng::episode_stream;
use euler_rl::{plan, Bernstein, BonusConstants, TabularMDP};

fn main() -> euler_rl::Result<()> {
    let mdp = EnvSpec::RandomMdp {
        states: 3,
        actions: 2,
        horizon: 3,
        seed: 5,
        concentration: 0.5,
    }
    .build()?;
    let text = mdp.to_json()?;
    assert_eq!(TabularMDP::from_json(&text)?, mdp);
    println!("model:\n{text}");

    let c = BonusConstants::new(3, 2, 3, 50, 0.1)?;
    let mut agent = Euler::new(3, 2, 3, Box::new(Bernstein { constants: c }));
    for k in 1..=50 {
        let b = agent.plan()?;
        let mut rng = episode_stream(1, k);
        let mut s = sample_start(&mdp, &mut rng);
        for t in 1..=3 {
            let a = b.act(s, t)?;
            let (next, r) = step(&mdp, s, a, &mut rng);
            agent.observe(s, a, r, next)?;
            s = next;
        }
    }
    let stats_json = serde_json::to_string(agent.stats())?;
    let restored: SufficientStats = serde_json::from_str(&stats_json)?;
    let bracket = plan(&restored, 3, &Bernstein { constants: c }, None)?;
    assert_eq!(bracket, agent.plan()?);
    let bracket_json = serde_json::to_string_pretty(&bracket)?;
    let _: ValueBracket = serde_json::from_str(&bracket_json)?;
    println!("statistics: {} bytes, bracket: {} bytes", stats_json.len(), bracket_json.len());
    println!("bracket width under the start distribution: {:.4}", bracket.width(Some(mdp.start())));
    Ok(())
}
