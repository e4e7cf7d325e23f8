use euler_rl::env::EnvSpec;
use euler_rl::harness::{
    compare, diagnostics_path, optimism_violation_rate, run_batch, run_experiment, Algorithm,
    DiagnosticsReport, ExperimentConfig, RegretTrace,
};

fn cfg(env: EnvSpec, k: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(env, Algorithm::EulerBernstein, k, 0.05, seed)
}

#[test]
fn chain_regret_is_sublinear() {
    let r = run_experiment(&cfg(EnvSpec::Chain { n: 6 }, 5000, 1)).unwrap();
    assert!(r.trace.regret_at(5000) / 5000.0 < r.trace.regret_at(500) / 500.0);
}

#[test]
fn random_mdp_violation_rate_is_below_delta() {
    let configs: Vec<ExperimentConfig> = (1..=50)
        .map(|seed| {
            let env = EnvSpec::RandomMdp {
                states: 4,
                actions: 2,
                horizon: 4,
                seed: 1000 + seed,
                concentration: 0.5,
            };
            cfg(env, 300, seed)
        })
        .collect();
    let rates: Vec<f64> = run_batch(&configs)
        .into_iter()
        .map(|r| optimism_violation_rate(&r.unwrap().trace))
        .collect();
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    assert!(mean <= 0.05, "{mean}");
}

#[test]
fn runs_are_reproducible_and_conserve_regret() {
    let env = EnvSpec::RandomMdp {
        states: 5,
        actions: 3,
        horizon: 4,
        seed: 8,
        concentration: 0.4,
    };
    let a = run_experiment(&cfg(env.clone(), 400, 2)).unwrap();
    let b = run_experiment(&cfg(env, 400, 2)).unwrap();
    assert_eq!(a.trace.to_csv(), b.trace.to_csv());
    let sum: f64 = a.trace.rows.iter().map(|r| r.instant_regret).sum();
    assert!((sum - a.trace.final_regret()).abs() < 1e-9);
    assert!(a.trace.rows.iter().all(|r| r.instant_regret >= -1e-10));
}

#[test]
fn batch_matches_sequential_runs() {
    let configs: Vec<ExperimentConfig> = (1..=4).map(|s| cfg(EnvSpec::Chain { n: 5 }, 200, s)).collect();
    let batch = run_batch(&configs);
    for (c, r) in configs.iter().zip(batch) {
        assert_eq!(r.unwrap().trace, run_experiment(c).unwrap().trace);
    }
}

#[test]
fn outputs_are_written_and_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = cfg(EnvSpec::Bandit {
        states: 3,
        actions: 2,
        horizon: 3,
        mu: None,
        reward_means: None,
    }, 100, 4);
    let path = dir.path().join("nested").join("trace.csv");
    c.output = Some(path.clone());
    let r = run_experiment(&c).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(RegretTrace::from_csv(&text).unwrap(), r.trace);
    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(diagnostics_path(&path)).unwrap()).unwrap();
    for key in [
        "environmental_norm",
        "max_return",
        "successor_range",
        "value_range",
        "bound_problem_dep",
        "bound_max_return",
        "bound_worst_case",
        "constants",
    ] {
        assert!(diag.get(key).is_some(), "{key}");
    }
    let report: DiagnosticsReport = serde_json::from_value(diag).unwrap();
    assert_eq!(report, r.report);
}

#[test]
fn io_failure_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let mut c = cfg(EnvSpec::Chain { n: 3 }, 5, 1);
    c.output = Some(blocker.join("trace.csv"));
    let err = run_experiment(&c).unwrap_err();
    assert!(!err.is_config_error());
}

#[test]
fn compare_reports_bounds_for_the_longest_run() {
    let arm = |algorithm| ExperimentConfig {
        algorithm,
        ..cfg(EnvSpec::Chain { n: 5 }, 300, 0)
    };
    let c = compare(&[arm(Algorithm::EulerBernstein), arm(Algorithm::EulerHoeffdingBaseline)], &[1, 2, 3]).unwrap();
    assert_eq!(c.runs.len(), 6);
    assert!(c.bounds.problem_dependent < c.bounds.worst_case);
    let json = serde_json::to_string(&c).unwrap();
    assert!(json.contains("euler_hoeffding_baseline"));
}
