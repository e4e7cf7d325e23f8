use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn euler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_euler")).args(args).output().unwrap()
}

fn euler_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_euler"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_stdout(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn run_happy_path_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run", "--env", "chain", "--n", "8", "--algo", "euler", "--episodes", "1000", "--delta",
        "0.05", "--seed", "1", "--out", "t.csv",
    ];
    let first = euler_in(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let csv = fs::read(dir.path().join("t.csv")).unwrap();
    let diag = fs::read(dir.path().join("t.diagnostics.json")).unwrap();
    assert!(csv.starts_with(b"episode,start_state,instant_regret,cumulative_regret,bracket_width,violation\n"));
    assert_eq!(csv.iter().filter(|&&b| b == b'\n').count(), 1001);
    let again = euler_in(dir.path(), &args);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("t.csv")).unwrap(), csv);
    assert_eq!(fs::read(dir.path().join("t.diagnostics.json")).unwrap(), diag);
}

#[test]
fn negative_episodes_is_a_usage_error_naming_the_flag() {
    let o = euler(&["run", "--env", "chain", "--n", "8", "--episodes", "-1", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--episodes"), "{}", stderr(&o));
}

#[test]
fn unknown_flags_are_rejected() {
    let o = euler(&["run", "--env", "chain", "--n", "4", "--bogus", "1", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = euler(&["diagnose", "--env", "chain", "--n", "4", "--goal", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_values_exit_with_config_status() {
    for args in [
        vec!["run", "--env", "chain", "--n", "1", "--out", "x.csv"],
        vec!["run", "--env", "chain", "--n", "4", "--delta", "1.5", "--out", "x.csv"],
        vec!["run", "--env", "chain", "--n", "4", "--eval-stride", "0", "--out", "x.csv"],
        vec!["run", "--env", "sparse", "--states", "4", "--actions", "2", "--horizon", "3", "--out", "x.csv"],
        vec!["run", "--env", "chain", "--n", "4"],
    ] {
        let o = euler(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn config_file_runs_and_conflicting_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "env": {"kind": "sparse_reward", "horizon": 6, "states": 5, "actions": 2, "goal_state": 3},
        "algorithm": "euler_hoeffding_baseline",
        "episodes": 50,
        "delta": 0.1,
        "seed": 4,
        "eval_stride": 5,
        "q_cap": null,
        "output": "from-config.csv"
    }"#;
    fs::write(dir.path().join("c.json"), config).unwrap();
    let o = euler_in(dir.path(), &["run", "--config", "c.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("from-config.csv").exists());

    let o = euler_in(dir.path(), &["run", "--config", "c.json", "--episodes", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--config"));
    let o = euler_in(dir.path(), &["run", "--config", "c.json", "--out", "other.csv"]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(dir.path().join("bad.json"), config.replace("\"seed\"", "\"seeds\"")).unwrap();
    let o = euler_in(dir.path(), &["run", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "x").unwrap();
    let o = euler_in(dir.path(), &["run", "--env", "chain", "--n", "3", "--episodes", "2", "--out", "blocker/t.csv"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn diagnose_examples() {
    let det = json_stdout(&euler(&["diagnose", "--env", "det-chain", "--states", "6"]));
    assert_eq!(det["environmental_norm"], 0.0);
    let bandit = json_stdout(&euler(&["diagnose", "--env", "bandit", "--states", "4", "--actions", "3", "--horizon", "5"]));
    assert!(bandit["successor_range"].as_f64().unwrap() <= 1.0);
    let chain = json_stdout(&euler(&["diagnose", "--env", "chain", "--n", "8"]));
    assert!(chain["environmental_norm"].as_f64().unwrap() <= 0.25);
    assert!(chain["constants"]["log_factor"].as_f64().unwrap() > 0.0);
    let random = json_stdout(&euler(&[
        "diagnose", "--env", "random", "--states", "4", "--actions", "2", "--horizon", "3", "--alpha", "0.5", "--seed", "3",
    ]));
    assert!(random["value_range"].as_f64().unwrap() <= 3.0);
}

#[test]
fn help_lists_every_flag() {
    let run = String::from_utf8(euler(&["run", "--help"]).stdout).unwrap();
    for flag in [
        "--env", "--n", "--states", "--actions", "--horizon", "--alpha", "--goal", "--algo", "--episodes", "--delta",
        "--seed", "--eval-stride", "--q-cap", "--config", "--out",
    ] {
        assert!(run.contains(flag), "run help lacks {flag}");
    }
    let sweep = String::from_utf8(euler(&["sweep", "--help"]).stdout).unwrap();
    assert!(sweep.contains("--seeds"));
    let top = String::from_utf8(euler(&["--help"]).stdout).unwrap();
    for sub in ["run", "sweep", "diagnose", "compare"] {
        assert!(top.contains(sub));
    }
}

fn summary_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(dir.join("summary.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("env,algorithm,seed,episodes,final_cumulative_regret"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn single_point_sweep_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = euler(&[
        "sweep", "--env", "chain", "--n", "5", "--episodes", "100", "--seeds", "3", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = summary_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1..4], ["euler_bernstein", "3", "100"]);
    assert!(out.join("chain-n5-euler_bernstein-seed3.csv").exists());
    assert!(out.join("chart.json").exists());
}

#[test]
fn chain_sweep_regret_follows_the_constant_trend() {
    let dir = tempfile::tempdir().unwrap();
    let o = euler(&[
        "sweep", "--env", "chain", "--n", "4,8,16", "--episodes", "3000", "--seeds", "1,2,3", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = summary_rows(dir.path());
    assert_eq!(rows.len(), 9);
    let mean = |env: &str| {
        let v: Vec<f64> = rows.iter().filter(|r| r[0] == env).map(|r| r[4].parse().unwrap()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let means = [mean("chain-n4"), mean("chain-n8"), mean("chain-n16")];
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi <= 3.0 * lo, "{means:?}");
}

#[test]
fn compare_writes_per_run_files_and_medians() {
    let dir = tempfile::tempdir().unwrap();
    let o = euler(&[
        "compare", "--env", "chain", "--n", "5", "--episodes", "200", "--seeds", "1,2", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = summary_rows(dir.path());
    assert_eq!(rows.len(), 4);
    let cmp: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("compare.json")).unwrap()).unwrap();
    assert_eq!(cmp["arms"].as_array().unwrap().len(), 2);
    assert!(cmp["bounds"]["worst_case"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("chain-n5-euler_hoeffding_baseline-seed2.csv").exists());
}

#[test]
fn identical_sweeps_give_identical_summaries() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = euler(&[
            "sweep", "--env", "random", "--states", "3,4", "--actions", "2", "--horizon", "3", "--episodes", "80",
            "--seeds", "1,2", "--out", d.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(summary_rows(a.path()), summary_rows(b.path()));
}
