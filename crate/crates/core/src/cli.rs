//! Command-line front end: `run`, `sweep`, `diagnose`, `compare`.
//!
//! Exit status is 0 on success, 2 for usage or configuration errors and 1
//! for runtime failures. Messages go to standard error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::env::EnvSpec;
use crate::error::{Error, Result};
use crate::harness::{
    compare_with_traces, run_batch, run_experiment, write_outputs, Algorithm, DiagnosticsReport,
    ExperimentConfig, RunResult,
};

/// Writes a line to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

const DEFAULT_EPISODES: u64 = 1000;
const DEFAULT_DELTA: f64 = 0.05;
const DEFAULT_ALPHA: f64 = 1.0;
const SUMMARY_HEADER: &str = "env,algorithm,seed,episodes,final_cumulative_regret";

#[derive(Debug, Parser)]
#[command(
    name = "euler",
    version,
    about = "Optimistic bracketed exploration on tabular episodic MDPs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment; writes a trace CSV and a diagnostics JSON.
    #[command(allow_negative_numbers = true)]
    Run(RunArgs),
    /// Run a grid of environments and seeds; writes one CSV per run and summary.csv.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Print hardness diagnostics and leading bound terms as JSON.
    #[command(allow_negative_numbers = true)]
    Diagnose(DiagnoseArgs),
    /// Run both algorithms over a seed set; writes per-run CSVs, summary.csv and compare.json.
    #[command(allow_negative_numbers = true)]
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnvKind {
    Chain,
    Bandit,
    DetChain,
    Sparse,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Euler,
    Hoeffding,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Euler => Algorithm::EulerBernstein,
            AlgoArg::Hoeffding => Algorithm::EulerHoeffdingBaseline,
        }
    }
}

/// Environment selection. Grid-valued flags take comma-separated lists in `sweep`.
#[derive(Debug, Clone, Args)]
pub struct EnvArgs {
    /// Environment family
    #[arg(long, value_enum)]
    pub env: Option<EnvKind>,
    /// Chain length (chain)
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Number of states (bandit, det-chain, sparse, random)
    #[arg(long, value_delimiter = ',')]
    pub states: Vec<usize>,
    /// Number of actions (bandit, sparse, random)
    #[arg(long, value_delimiter = ',')]
    pub actions: Vec<usize>,
    /// Episode length (bandit, sparse, random)
    #[arg(long, value_delimiter = ',')]
    pub horizon: Vec<usize>,
    /// Dirichlet parameter of transition rows (random)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Goal state index (sparse)
    #[arg(long)]
    pub goal: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct LearnArgs {
    /// Confidence interval used by the agent
    #[arg(long, value_enum)]
    pub algo: Option<AlgoArg>,
    /// Number of episodes K
    #[arg(long)]
    pub episodes: Option<u64>,
    /// Failure probability in (0, 1)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Evaluate the executed policy exactly every this many episodes
    #[arg(long)]
    pub eval_stride: Option<u64>,
    /// Cap on every optimistic Q-value (bounded-return setting)
    #[arg(long)]
    pub q_cap: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[command(flatten)]
    pub learn: LearnArgs,
    /// Experiment seed; also seeds random-model generation
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON experiment config; conflicts with explicit experiment flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trace CSV path; diagnostics go to <stem>.diagnostics.json
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[command(flatten)]
    pub learn: LearnArgs,
    /// Seed that generates random models
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated experiment seeds
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// JSON experiment config used as the base point; conflicts with explicit flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    /// Number of episodes K
    #[arg(long)]
    pub episodes: Option<u64>,
    /// Failure probability in (0, 1)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Evaluate the executed policy exactly every this many episodes
    #[arg(long)]
    pub eval_stride: Option<u64>,
    /// Cap on every optimistic Q-value (bounded-return setting)
    #[arg(long)]
    pub q_cap: Option<f64>,
    /// Seed that generates random models
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated experiment seeds
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// JSON experiment config shared by both arms; conflicts with explicit flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    /// Episodes used for the bound terms and bonus constants
    #[arg(long)]
    pub episodes: Option<u64>,
    /// Failure probability in (0, 1)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Seed that generates random models
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON experiment config to read the environment from
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn single(flag: &str, values: &[usize]) -> Result<Option<usize>> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(*v)),
        _ => Err(config_err(format!("--{flag} takes a single value here"))),
    }
}

fn need(flag: &str, v: Option<usize>) -> Result<usize> {
    v.ok_or_else(|| config_err(format!("--{flag} is required for this environment")))
}

impl EnvArgs {
    fn is_empty(&self) -> bool {
        self.env.is_none()
            && self.n.is_empty()
            && self.states.is_empty()
            && self.actions.is_empty()
            && self.horizon.is_empty()
            && self.alpha.is_none()
            && self.goal.is_none()
    }

    /// Every environment of the grid spanned by the list-valued flags.
    pub fn specs(&self, seed: u64) -> Result<Vec<EnvSpec>> {
        let kind = self.env.ok_or_else(|| config_err("--env is required"))?;
        let axis = |v: &[usize]| -> Vec<Option<usize>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().copied().map(Some).collect()
            }
        };
        let mut out = Vec::new();
        for n in axis(&self.n) {
            for states in axis(&self.states) {
                for actions in axis(&self.actions) {
                    for horizon in axis(&self.horizon) {
                        out.push(self.spec_at(kind, n, states, actions, horizon, seed)?);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn spec(&self, seed: u64) -> Result<EnvSpec> {
        let kind = self.env.ok_or_else(|| config_err("--env is required"))?;
        self.spec_at(
            kind,
            single("n", &self.n)?,
            single("states", &self.states)?,
            single("actions", &self.actions)?,
            single("horizon", &self.horizon)?,
            seed,
        )
    }

    fn spec_at(
        &self,
        kind: EnvKind,
        n: Option<usize>,
        states: Option<usize>,
        actions: Option<usize>,
        horizon: Option<usize>,
        seed: u64,
    ) -> Result<EnvSpec> {
        let unused = |flag: &str, set: bool| -> Result<()> {
            if set {
                Err(config_err(format!("--{flag} does not apply to --env {kind:?}").to_lowercase()))
            } else {
                Ok(())
            }
        };
        unused("alpha", self.alpha.is_some() && kind != EnvKind::Random)?;
        unused("goal", self.goal.is_some() && kind != EnvKind::Sparse)?;
        unused("n", n.is_some() && kind != EnvKind::Chain)?;
        Ok(match kind {
            EnvKind::Chain => {
                unused("states", states.is_some())?;
                unused("actions", actions.is_some())?;
                unused("horizon", horizon.is_some())?;
                EnvSpec::Chain { n: need("n", n)? }
            }
            EnvKind::DetChain => {
                unused("actions", actions.is_some())?;
                unused("horizon", horizon.is_some())?;
                EnvSpec::DeterministicChain {
                    states: need("states", states)?,
                }
            }
            EnvKind::Bandit => EnvSpec::Bandit {
                states: need("states", states)?,
                actions: need("actions", actions)?,
                horizon: need("horizon", horizon)?,
                mu: None,
                reward_means: None,
            },
            EnvKind::Sparse => EnvSpec::SparseReward {
                horizon: need("horizon", horizon)?,
                states: need("states", states)?,
                actions: need("actions", actions)?,
                goal_state: need("goal", self.goal)?,
            },
            EnvKind::Random => EnvSpec::RandomMdp {
                states: need("states", states)?,
                actions: need("actions", actions)?,
                horizon: need("horizon", horizon)?,
                seed,
                concentration: self.alpha.unwrap_or(DEFAULT_ALPHA),
            },
        })
    }
}

impl LearnArgs {
    fn is_empty(&self) -> bool {
        self.algo.is_none()
            && self.episodes.is_none()
            && self.delta.is_none()
            && self.eval_stride.is_none()
            && self.q_cap.is_none()
    }

    fn config(&self, env: EnvSpec, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            env,
            algorithm: self.algo.unwrap_or(AlgoArg::Euler).into(),
            episodes: self.episodes.unwrap_or(DEFAULT_EPISODES),
            delta: self.delta.unwrap_or(DEFAULT_DELTA),
            seed,
            eval_stride: self.eval_stride.unwrap_or(1),
            q_cap: self.q_cap,
            output: None,
        }
    }
}

fn reject_with_config(conflicts: &[(&str, bool)]) -> Result<()> {
    let names: Vec<&str> = conflicts.iter().filter(|c| c.1).map(|c| c.0).collect();
    if names.is_empty() {
        Ok(())
    } else {
        Err(config_err(format!(
            "--config conflicts with {}",
            names.join(", ")
        )))
    }
}

fn check_positive_seeds(seeds: &[u64], fallback: u64) -> Vec<u64> {
    if seeds.is_empty() {
        vec![fallback]
    } else {
        seeds.to_vec()
    }
}

/// File-name stem identifying a run inside an output directory.
pub fn run_stem(env: &EnvSpec, algorithm: Algorithm, seed: u64) -> String {
    let params = match env {
        EnvSpec::Chain { n } => format!("n{n}"),
        EnvSpec::DeterministicChain { states } => format!("s{states}"),
        EnvSpec::Bandit {
            states,
            actions,
            horizon,
            ..
        } => format!("s{states}-a{actions}-h{horizon}"),
        EnvSpec::SparseReward {
            horizon,
            states,
            actions,
            goal_state,
        } => format!("s{states}-a{actions}-h{horizon}-g{goal_state}"),
        EnvSpec::RandomMdp {
            states,
            actions,
            horizon,
            seed,
            concentration,
        } => format!("s{states}-a{actions}-h{horizon}-m{seed}-c{concentration}"),
    };
    format!("{}-{params}-{}-seed{seed}", env.family(), algorithm.name())
}

fn env_label(env: &EnvSpec) -> String {
    let stem = run_stem(env, Algorithm::EulerBernstein, 0);
    stem.split("-euler_bernstein").next().unwrap_or(&stem).to_string()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn summary_csv(rows: &[(String, Algorithm, u64, u64, f64)]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for (env, algo, seed, k, regret) in rows {
        let _ = writeln!(out, "{env},{},{seed},{k},{regret}", algo.name());
    }
    out
}

/// Vega-Lite spec for plotting final regret from `summary.csv`.
fn chart_spec(x_field: &str) -> String {
    let spec = json!({
        "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
        "data": {"url": "summary.csv"},
        "mark": {"type": "point", "tooltip": true},
        "encoding": {
            "x": {"field": x_field, "type": "nominal"},
            "y": {"field": "final_cumulative_regret", "type": "quantitative"},
            "color": {"field": "algorithm", "type": "nominal"}
        }
    });
    serde_json::to_string_pretty(&spec).expect("static JSON") + "\n"
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => {
            reject_with_config(&[
                ("environment flags", !args.env.is_empty()),
                ("learning flags", !args.learn.is_empty()),
                ("--seed", args.seed.is_some()),
            ])?;
            ExperimentConfig::load(path)?
        }
        None => {
            let seed = args.seed.unwrap_or(0);
            args.learn.config(args.env.spec(seed)?, seed)
        }
    };
    match (&args.out, &cfg.output) {
        (Some(a), Some(b)) if a != b => {
            return Err(config_err("--out conflicts with the config's output path"))
        }
        (Some(a), _) => cfg.output = Some(a.clone()),
        (None, Some(_)) => {}
        (None, None) => return Err(config_err("--out is required")),
    }
    let result = run_experiment(&cfg)?;
    out!(
        "{} episodes, final cumulative regret {}",
        result.trace.len(),
        result.trace.final_regret()
    );
    Ok(())
}

fn batch_outputs(
    dir: &Path,
    configs: &[ExperimentConfig],
    results: Vec<Result<RunResult>>,
) -> Result<Vec<(String, Algorithm, u64, u64, f64)>> {
    let mut rows = Vec::with_capacity(configs.len());
    for (cfg, result) in configs.iter().zip(results) {
        let result = result?;
        let path = dir.join(format!("{}.csv", run_stem(&cfg.env, cfg.algorithm, cfg.seed)));
        write_outputs(&result, &path)?;
        rows.push((
            env_label(&cfg.env),
            cfg.algorithm,
            cfg.seed,
            cfg.episodes,
            result.trace.final_regret(),
        ));
    }
    Ok(rows)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let model_seed = args.seed.unwrap_or(0);
    let base: Vec<ExperimentConfig> = match &args.config {
        Some(path) => {
            reject_with_config(&[
                ("environment flags", !args.env.is_empty()),
                ("learning flags", !args.learn.is_empty()),
                ("--seed", args.seed.is_some()),
            ])?;
            vec![ExperimentConfig::load(path)?]
        }
        None => args
            .env
            .specs(model_seed)?
            .into_iter()
            .map(|env| args.learn.config(env, model_seed))
            .collect(),
    };
    let seeds = check_positive_seeds(&args.seeds, base[0].seed);
    let configs: Vec<ExperimentConfig> = base
        .iter()
        .flat_map(|b| {
            seeds.iter().map(move |&seed| ExperimentConfig {
                seed,
                output: None,
                ..b.clone()
            })
        })
        .collect();
    for c in &configs {
        c.validate()?;
        c.env.build()?;
    }
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let results = run_batch(&configs);
    let rows = batch_outputs(&args.out, &configs, results)?;
    write_file(&args.out.join("summary.csv"), &summary_csv(&rows))?;
    write_file(&args.out.join("chart.json"), &chart_spec("env"))?;
    out!("{} runs written to {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let model_seed = args.seed.unwrap_or(0);
    let base = match &args.config {
        Some(path) => {
            reject_with_config(&[
                ("environment flags", !args.env.is_empty()),
                ("--episodes", args.episodes.is_some()),
                ("--delta", args.delta.is_some()),
                ("--eval-stride", args.eval_stride.is_some()),
                ("--q-cap", args.q_cap.is_some()),
                ("--seed", args.seed.is_some()),
            ])?;
            ExperimentConfig::load(path)?
        }
        None => LearnArgs {
            algo: None,
            episodes: args.episodes,
            delta: args.delta,
            eval_stride: args.eval_stride,
            q_cap: args.q_cap,
        }
        .config(args.env.spec(model_seed)?, model_seed),
    };
    let seeds = check_positive_seeds(&args.seeds, base.seed);
    let arms: Vec<ExperimentConfig> = [Algorithm::EulerBernstein, Algorithm::EulerHoeffdingBaseline]
        .into_iter()
        .map(|algorithm| ExperimentConfig {
            algorithm,
            output: None,
            ..base.clone()
        })
        .collect();
    for a in &arms {
        a.validate()?;
    }
    let (comparison, traces) = compare_with_traces(&arms, &seeds)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut rows = Vec::new();
    for (run, trace) in comparison.runs.iter().zip(&traces) {
        let path = args
            .out
            .join(format!("{}.csv", run_stem(&base.env, run.algorithm, run.seed)));
        write_file(&path, &trace.to_csv())?;
        rows.push((
            env_label(&base.env),
            run.algorithm,
            run.seed,
            run.episodes,
            run.final_regret,
        ));
    }
    write_file(&args.out.join("summary.csv"), &summary_csv(&rows))?;
    write_file(&args.out.join("chart.json"), &chart_spec("algorithm"))?;
    let mut json = serde_json::to_string_pretty(&comparison)?;
    json.push('\n');
    write_file(&args.out.join("compare.json"), &json)?;
    for arm in &comparison.arms {
        out!("{}: median final regret {}", arm.algorithm.name(), arm.median_regret);
    }
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<()> {
    let (env, episodes, delta) = match &args.config {
        Some(path) => {
            reject_with_config(&[
                ("environment flags", !args.env.is_empty()),
                ("--episodes", args.episodes.is_some()),
                ("--delta", args.delta.is_some()),
                ("--seed", args.seed.is_some()),
            ])?;
            let cfg = ExperimentConfig::load(path)?;
            (cfg.env, cfg.episodes, cfg.delta)
        }
        None => (
            args.env.spec(args.seed.unwrap_or(0))?,
            args.episodes.unwrap_or(DEFAULT_EPISODES),
            args.delta.unwrap_or(DEFAULT_DELTA),
        ),
    };
    let mdp = env.build()?;
    let report = DiagnosticsReport::for_model(&mdp, episodes, delta)?;
    out!("{}", report.to_json()?);
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                2
            } else {
                1
            }
        }
    }
}
