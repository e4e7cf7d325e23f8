//! Running an experiment from a JSON config and writing its trace files.

use euler_rl::harness::{diagnostics_path, run_experiment, ExperimentConfig};

fn main() -> euler_rl::Result<()> {
    let dir = std::env::temp_dir().join("euler-example");
    let config = format!(
        r#"{{
            "env": {{"kind": "bandit", "states": 4, "actions": 3, "horizon": 5}},
            "algorithm": "euler_bernstein",
            "episodes": 2000,
            "delta": 0.05,
            "seed": 9,
            "eval_stride": 10,
            "q_cap": null,
            "output": {:?}
        }}"#,
        dir.join("bandit.csv")
    );
    let cfg = ExperimentConfig::from_json(&config)?;
    let r = run_experiment(&cfg)?;
    let path = cfg.output.as_ref().expect("set above");
    println!("final regret {:.3}", r.trace.final_regret());
    println!("trace: {}", path.display());
    println!("diagnostics: {}", diagnostics_path(path).display());
    Ok(())
}
