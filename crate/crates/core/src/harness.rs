//! Seeded experiment loop with exact regret accounting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::Euler;
use crate::concentration::{Bernstein, BonusConstants, ConfidenceInterval, Hoeffding};
use crate::env::{sample_start, step, EnvSpec};
use crate::error::{Error, Result};
use crate::mdp::{
    bounds_from, diagnose, optimal_values, policy_values, Diagnostics, PolicyTable, TabularMDP,
    TheoreticalBounds, ValueTable,
};
use crate::rng::episode_stream;

/// Tolerance of the bracket check against exact `V*`.
pub const BRACKET_TOL: f64 = 1e-9;

pub const CSV_HEADER: &str =
    "episode,start_state,instant_regret,cumulative_regret,bracket_width,violation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    EulerBernstein,
    EulerHoeffdingBaseline,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::EulerBernstein => "euler_bernstein",
            Algorithm::EulerHoeffdingBaseline => "euler_hoeffding_baseline",
        }
    }

    pub fn confidence_interval(self, constants: BonusConstants) -> Box<dyn ConfidenceInterval> {
        match self {
            Algorithm::EulerBernstein => Box::new(Bernstein { constants }),
            Algorithm::EulerHoeffdingBaseline => Box::new(Hoeffding { constants }),
        }
    }
}

fn default_stride() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub algorithm: Algorithm,
    pub episodes: u64,
    pub delta: f64,
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub eval_stride: u64,
    #[serde(default)]
    pub q_cap: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(env: EnvSpec, algorithm: Algorithm, episodes: u64, delta: f64, seed: u64) -> Self {
        Self {
            env,
            algorithm,
            episodes,
            delta,
            seed,
            eval_stride: 1,
            q_cap: None,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta {} outside (0, 1)", self.delta)));
        }
        if self.eval_stride == 0 {
            return Err(Error::InvalidConfig("eval_stride must be at least 1".into()));
        }
        if let Some(c) = self.q_cap {
            if !(c > 0.0) {
                return Err(Error::InvalidConfig(format!("q_cap {c} must be positive")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub episode: u64,
    pub start_state: usize,
    pub instant_regret: f64,
    pub cumulative_regret: f64,
    /// `V̄_1 - V̲_1` at the realized start state.
    pub bracket_width: f64,
    /// Some `(t, s)` had `V*` outside the bracket when the episode was planned.
    pub violation: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub rows: Vec<TraceRow>,
}

impl RegretTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cumulative_regret)
    }

    /// Cumulative regret after episode `k` (0 for `k = 0`).
    pub fn regret_at(&self, k: u64) -> f64 {
        match k {
            0 => 0.0,
            _ => self.rows[(k as usize).min(self.rows.len()) - 1].cumulative_regret,
        }
    }

    pub fn any_violation(&self) -> bool {
        self.rows.iter().any(|r| r.violation)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            // Display on f64 is the shortest string that round-trips exactly
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.episode,
                r.start_state,
                r.instant_regret,
                r.cumulative_regret,
                r.bracket_width,
                u8::from(r.violation)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(CSV_HEADER) {
            return Err(Error::InvalidArgument("missing or unexpected CSV header".into()));
        }
        let bad = |line: &str| Error::InvalidArgument(format!("malformed trace row: {line}"));
        let rows = lines
            .map(|line| {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 6 {
                    return Err(bad(line));
                }
                Ok(TraceRow {
                    episode: f[0].parse().map_err(|_| bad(line))?,
                    start_state: f[1].parse().map_err(|_| bad(line))?,
                    instant_regret: f[2].parse().map_err(|_| bad(line))?,
                    cumulative_regret: f[3].parse().map_err(|_| bad(line))?,
                    bracket_width: f[4].parse().map_err(|_| bad(line))?,
                    violation: match f[5] {
                        "0" => false,
                        "1" => true,
                        _ => return Err(bad(line)),
                    },
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }
}

/// Fraction of recorded episodes flagged with a bracket violation.
pub fn optimism_violation_rate(trace: &RegretTrace) -> f64 {
    if trace.is_empty() {
        return 0.0;
    }
    trace.rows.iter().filter(|r| r.violation).count() as f64 / trace.len() as f64
}

/// Diagnostics JSON written next to each trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub environmental_norm: f64,
    pub max_return: f64,
    pub successor_range: f64,
    pub value_range: f64,
    pub bound_problem_dep: f64,
    pub bound_max_return: f64,
    pub bound_worst_case: f64,
    pub constants: BonusConstants,
}

impl DiagnosticsReport {
    pub fn new(d: &Diagnostics, b: &TheoreticalBounds, constants: BonusConstants) -> Self {
        Self {
            environmental_norm: d.environmental_norm,
            max_return: d.max_return,
            successor_range: d.successor_range,
            value_range: d.value_range,
            bound_problem_dep: b.problem_dependent,
            bound_max_return: b.max_return,
            bound_worst_case: b.worst_case,
            constants,
        }
    }

    pub fn for_model(mdp: &TabularMDP, episodes: u64, delta: f64) -> Result<Self> {
        let d = diagnose(mdp);
        let c = BonusConstants::new(
            mdp.num_states(),
            mdp.num_actions(),
            mdp.horizon(),
            episodes,
            delta,
        )
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(Self::new(&d, &bounds_from(mdp, &d, episodes), c))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: RegretTrace,
    pub diagnostics: Diagnostics,
    pub report: DiagnosticsReport,
    /// `V*_1` from the true model.
    pub optimal_start_values: Vec<f64>,
}

/// Runs one seeded experiment. Writes outputs when `config.output` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    let mdp = config.env.build()?;
    let result = run_on_model(config, &mdp)?;
    if let Some(path) = &config.output {
        write_outputs(&result, path)?;
    }
    Ok(result)
}

/// Runs `config` against an already-built model, ignoring `config.env`.
pub fn run_on_model(config: &ExperimentConfig, mdp: &TabularMDP) -> Result<RunResult> {
    config.validate()?;
    let report = DiagnosticsReport::for_model(mdp, config.episodes, config.delta)?;
    let diagnostics = diagnose(mdp);
    let (v_star, _) = optimal_values(mdp);
    let h = mdp.horizon();

    let ci = config.algorithm.confidence_interval(report.constants);
    let mut agent =
        Euler::new(mdp.num_states(), mdp.num_actions(), h, ci).with_q_cap(config.q_cap);

    let mut rows = Vec::with_capacity(config.episodes as usize);
    let mut cumulative = 0.0;
    let mut evaluated: Option<(PolicyTable, ValueTable)> = None;

    for k in 1..=config.episodes {
        let bracket = agent.plan()?;
        let mut rng = episode_stream(config.seed, k);
        let s1 = sample_start(mdp, &mut rng);

        let due = (k - 1) % config.eval_stride == 0;
        let stale = evaluated
            .as_ref()
            .is_none_or(|(pi, _)| due && *pi != bracket.policy);
        if stale {
            let values = policy_values(mdp, &bracket.policy)?;
            evaluated = Some((bracket.policy.clone(), values));
        }
        let v_pi = &evaluated.as_ref().expect("evaluated above").1;
        let instant = v_star.get(1, s1) - v_pi.get(1, s1);
        cumulative += instant;

        rows.push(TraceRow {
            episode: k,
            start_state: s1,
            instant_regret: instant,
            cumulative_regret: cumulative,
            bracket_width: bracket.upper.get(1, s1) - bracket.lower.get(1, s1),
            violation: !bracket.contains(&v_star, BRACKET_TOL),
        });

        let mut s = s1;
        for t in 1..=h {
            let a = bracket.policy.action(s, t);
            let (s_next, r) = step(mdp, s, a, &mut rng);
            agent.observe(s, a, r, s_next)?;
            s = s_next;
        }
    }

    Ok(RunResult {
        trace: RegretTrace { rows },
        diagnostics,
        report,
        optimal_start_values: v_star.row(1).to_vec(),
    })
}

/// Path of the diagnostics JSON that accompanies a trace CSV.
pub fn diagnostics_path(trace_path: &Path) -> PathBuf {
    trace_path.with_extension("diagnostics.json")
}

/// Writes the trace CSV at `path` and the diagnostics JSON beside it.
pub fn write_outputs(result: &RunResult, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, result.trace.to_csv()).map_err(|e| Error::io(path, e))?;
    let diag = diagnostics_path(path);
    let mut json = result.report.to_json()?;
    json.push('\n');
    fs::write(&diag, json).map_err(|e| Error::io(&diag, e))?;
    Ok(())
}

/// Runs independent configurations in parallel; results keep input order.
pub fn run_batch(configs: &[ExperimentConfig]) -> Vec<Result<RunResult>> {
    configs
        .par_iter()
        .map(|c| {
            c.validate()?;
            let mdp = c.env.build()?;
            run_on_model(c, &mdp)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub episodes: u64,
    pub final_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub algorithm: Algorithm,
    pub median_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// One entry per input arm, in input order.
    pub arms: Vec<ArmSummary>,
    /// One row per (arm, seed).
    pub runs: Vec<SummaryRow>,
    pub bounds: TheoreticalBounds,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Runs every arm on every seed and reports per-arm median final regret.
///
/// The `seed` and `output` fields of the arms are ignored.
pub fn compare(arms: &[ExperimentConfig], seeds: &[u64]) -> Result<Comparison> {
    compare_with_traces(arms, seeds).map(|(c, _)| c)
}

/// [`compare`] that also returns every trace, ordered like `Comparison::runs`.
pub fn compare_with_traces(
    arms: &[ExperimentConfig],
    seeds: &[u64],
) -> Result<(Comparison, Vec<RegretTrace>)> {
    if arms.len() < 2 {
        return Err(Error::InvalidConfig("compare needs at least two configurations".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("compare needs at least one seed".into()));
    }
    if arms.iter().any(|a| a.env != arms[0].env) {
        return Err(Error::InvalidConfig("compared configurations use different environments".into()));
    }
    let mdp = arms[0].env.build()?;
    let jobs: Vec<ExperimentConfig> = arms
        .iter()
        .flat_map(|arm| {
            seeds.iter().map(move |&seed| ExperimentConfig {
                seed,
                output: None,
                ..arm.clone()
            })
        })
        .collect();
    let results: Vec<RunResult> = jobs
        .par_iter()
        .map(|c| run_on_model(c, &mdp))
        .collect::<Result<_>>()?;

    let runs: Vec<SummaryRow> = jobs
        .iter()
        .zip(&results)
        .map(|(c, r)| SummaryRow {
            algorithm: c.algorithm,
            seed: c.seed,
            episodes: c.episodes,
            final_regret: r.trace.final_regret(),
        })
        .collect();
    let summaries = runs
        .chunks(seeds.len())
        .zip(arms)
        .map(|(chunk, arm)| ArmSummary {
            algorithm: arm.algorithm,
            median_regret: median(&chunk.iter().map(|r| r.final_regret).collect::<Vec<_>>()),
        })
        .collect();
    let episodes = arms.iter().map(|a| a.episodes).max().unwrap_or(0);
    let bounds = bounds_from(&mdp, &results[0].diagnostics, episodes);
    let traces = results.into_iter().map(|r| r.trace).collect();
    Ok((
        Comparison {
            arms: summaries,
            runs,
            bounds,
        },
        traces,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::RewardDist;

    fn chain(n: usize, k: u64) -> ExperimentConfig {
        ExperimentConfig::new(EnvSpec::Chain { n }, Algorithm::EulerBernstein, k, 0.1, 1)
    }

    #[test]
    fn zero_episodes_empty_trace() {
        let r = run_experiment(&chain(4, 0)).unwrap();
        assert!(r.trace.is_empty());
        assert_eq!(r.trace.final_regret(), 0.0);
        assert_eq!(r.trace.to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn identical_actions_have_zero_regret() {
        let p = vec![0.3, 0.7];
        let mdp = TabularMDP::new(
            3,
            vec![vec![p.clone(); 3]; 2],
            vec![vec![RewardDist::Bernoulli { mean: 0.4 }; 3]; 2],
            vec![0.5, 0.5],
        )
        .unwrap();
        let r = run_on_model(&chain(2, 50), &mdp).unwrap();
        assert!(r.trace.rows.iter().all(|row| row.instant_regret.abs() < 1e-12));
    }

    #[test]
    fn conservation_and_monotonicity() {
        let r = run_experiment(&chain(4, 200)).unwrap();
        let sum: f64 = r.trace.rows.iter().map(|x| x.instant_regret).sum();
        assert!((sum - r.trace.final_regret()).abs() < 1e-9);
        for w in r.trace.rows.windows(2) {
            assert!(w[1].cumulative_regret >= w[0].cumulative_regret - 1e-10);
            assert!(w[1].instant_regret >= -1e-10);
        }
    }

    #[test]
    fn stride_carries_forward() {
        let mut cfg = chain(4, 60);
        cfg.eval_stride = 7;
        let strided = run_experiment(&cfg).unwrap();
        let exact = run_experiment(&chain(4, 60)).unwrap();
        // the learner's trajectory does not depend on how regret is measured
        for (a, b) in strided.trace.rows.iter().zip(&exact.trace.rows) {
            assert_eq!(a.start_state, b.start_state);
            assert_eq!(a.bracket_width, b.bracket_width);
        }
        for i in (0..60).step_by(7) {
            assert_eq!(strided.trace.rows[i].instant_regret, exact.trace.rows[i].instant_regret);
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let r = run_experiment(&chain(5, 40)).unwrap();
        let back = RegretTrace::from_csv(&r.trace.to_csv()).unwrap();
        assert_eq!(back, r.trace);
    }

    #[test]
    fn violation_rate_extremes() {
        let row = |v| TraceRow {
            episode: 1,
            start_state: 0,
            instant_regret: 0.0,
            cumulative_regret: 0.0,
            bracket_width: 0.0,
            violation: v,
        };
        assert_eq!(optimism_violation_rate(&RegretTrace::default()), 0.0);
        let none = RegretTrace { rows: vec![row(false); 5] };
        let all = RegretTrace { rows: vec![row(true); 5] };
        assert_eq!(optimism_violation_rate(&none), 0.0);
        assert_eq!(optimism_violation_rate(&all), 1.0);
    }

    #[test]
    fn config_json_uses_field_names() {
        let mut cfg = chain(6, 100);
        cfg.q_cap = Some(1.0);
        let text = serde_json::to_string(&cfg).unwrap();
        for key in ["\"env\"", "\"algorithm\"", "\"episodes\"", "\"delta\"", "\"seed\"", "\"eval_stride\"", "\"q_cap\"", "\"output\""] {
            assert!(text.contains(key), "{key} missing from {text}");
        }
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let minimal = r#"{"env":{"kind":"chain","n":4},"algorithm":"euler_hoeffding_baseline","episodes":3,"delta":0.1,"seed":2}"#;
        let cfg = ExperimentConfig::from_json(minimal).unwrap();
        assert_eq!(cfg.eval_stride, 1);
        assert!(ExperimentConfig::from_json(&minimal.replace("0.1", "1.5")).is_err());
        assert!(ExperimentConfig::from_json(&minimal.replace("\"seed\"", "\"sed\"")).is_err());
    }

    #[test]
    fn compare_identical_arms_and_mismatch() {
        let arm = chain(4, 30);
        let c = compare(&[arm.clone(), arm.clone()], &[1, 2, 3]).unwrap();
        assert_eq!(c.arms[0].median_regret, c.arms[1].median_regret);
        assert_eq!(c.runs.len(), 6);
        let zero = compare(&[chain(4, 0), chain(4, 0)], &[1]).unwrap();
        assert!(zero.arms.iter().all(|a| a.median_regret == 0.0));
        assert!(compare(&[chain(4, 5), chain(5, 5)], &[1]).is_err());
        assert!(compare(&[chain(4, 5)], &[1]).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[]), 0.0);
    }
}
