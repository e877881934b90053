//! Experiment orchestration: one policy and one instance over a grid of
//! seeds and horizons, with regret traces written as CSV plus JSON metadata.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arms::ArmSubset;
use crate::comb_ucb::CombUcb;
use crate::constrained_elim::{ConstrainedElimination, DecisionSet};
use crate::environments::{
    top_indices, Contexts, GraphBanditInstance, Instance, InstanceFile, LinearBanditInstance, RoundOutcome,
};
use crate::error::{Error, Result};
use crate::graph_elimination::{log_width_param, CombArmElimination};
use crate::linear_hier_elim::HierarchicalElimination;
use crate::policy::{GraphPolicy, LinearPolicy};
use crate::rng::{stream, StreamPurpose};

pub const DEFAULT_DELTA: f64 = 0.05;
pub const MIN_FIT_HORIZONS: usize = 3;
pub const MIN_FIT_SEEDS: usize = 10;
/// Subsampled traces keep about this many points.
pub const SUBSAMPLE_POINTS: usize = 1000;

/// Decision list given inline or as a path to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecisionsRef {
    Inline(Vec<Vec<usize>>),
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    CombElim,
    CombUcb {
        /// Index width `L`; defaults to `sqrt(ln(2KT/δ))`.
        #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
        width_l: Option<f64>,
    },
    HierElim,
    ConstrainedElim {
        decisions: DecisionsRef,
    },
    Oracle,
}

impl PolicySpec {
    pub fn id(&self) -> &'static str {
        match self {
            PolicySpec::CombElim => "comb-elim",
            PolicySpec::CombUcb { .. } => "comb-ucb",
            PolicySpec::HierElim => "hier-elim",
            PolicySpec::ConstrainedElim { .. } => "constrained-elim",
            PolicySpec::Oracle => "oracle",
        }
    }

    /// Builds a spec from a CLI-style policy name.
    pub fn from_id(id: &str, width_l: Option<f64>, decisions: Option<PathBuf>) -> Result<Self> {
        Ok(match id {
            "comb-elim" => PolicySpec::CombElim,
            "comb-ucb" => PolicySpec::CombUcb { width_l },
            "hier-elim" => PolicySpec::HierElim,
            "oracle" => PolicySpec::Oracle,
            "constrained-elim" => PolicySpec::ConstrainedElim {
                decisions: DecisionsRef::Path(
                    decisions.ok_or_else(|| Error::Config("constrained-elim needs a decision file".into()))?,
                ),
            },
            other => return Err(Error::Config(format!("unknown policy '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceRef {
    Inline(InstanceFile),
    Path(PathBuf),
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub policy: PolicySpec,
    pub instance: InstanceRef,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Keep every `⌈T/1000⌉`-th round in written traces.
    #[serde(default)]
    pub subsample: bool,
    /// Also record the policy's per-round debug columns.
    #[serde(default)]
    pub trace: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(policy: PolicySpec, instance: InstanceRef, horizons: Vec<usize>, seeds: Vec<u64>) -> Self {
        Self {
            policy,
            instance,
            horizons,
            seeds,
            delta: DEFAULT_DELTA,
            output: None,
            subsample: false,
            trace: false,
            workers: None,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut config: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() || self.horizons[0] == 0 {
            return Err(Error::Config("horizons must be a nonempty list of positive integers".into()));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("horizons must be strictly increasing".into()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if self.seeds.is_empty() || seeds.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be a nonempty list of distinct integers".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be positive".into()));
        }
        Ok(())
    }
}

/// Metadata written beside each trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub policy: String,
    pub instance: String,
    pub seed: u64,
    pub horizon: usize,
    pub delta: f64,
    pub final_regret: f64,
    pub wall_time_secs: f64,
}

/// Policy debug columns, one row per round (or per stage and round).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DebugTrace {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DebugTrace {
    fn push(&mut self, round: usize, row: Vec<(&'static str, f64)>) {
        if self.columns.is_empty() {
            self.columns.push("t".into());
            self.columns.extend(row.iter().map(|(name, _)| name.to_string()));
        }
        let mut values = vec![(round + 1) as f64];
        values.extend(row.into_iter().map(|(_, v)| v));
        self.rows.push(values);
    }
}

/// Cumulative expected regret after each round.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub meta: TraceMeta,
    pub cumulative: Vec<f64>,
    pub debug: Option<DebugTrace>,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Plays the best feasible decision every round.
#[derive(Debug, Clone)]
pub struct GraphOracle {
    decision: ArmSubset,
}

impl GraphOracle {
    pub fn new(decision: ArmSubset) -> Self {
        Self { decision }
    }
}

impl GraphPolicy for GraphOracle {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn select(&mut self) -> Result<ArmSubset> {
        Ok(self.decision.clone())
    }

    fn observe(&mut self, _: &RoundOutcome) -> Result<()> {
        Ok(())
    }
}

/// Plays the true top-S arms under the current contexts.
#[derive(Debug, Clone)]
pub struct LinearOracle {
    theta: Vec<f64>,
    budget: usize,
}

impl LinearOracle {
    pub fn new(theta: Vec<f64>, budget: usize) -> Self {
        Self { theta, budget }
    }
}

impl LinearPolicy for LinearOracle {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn select(&mut self, contexts: &Contexts) -> Result<ArmSubset> {
        let means: Vec<f64> = contexts
            .iter()
            .map(|x| x.iter().zip(&self.theta).map(|(a, b)| a * b).sum())
            .collect();
        Ok(top_indices(&means, self.budget))
    }

    fn observe(&mut self, _: &Contexts, _: &RoundOutcome) -> Result<()> {
        Ok(())
    }
}

fn accumulate(cumulative: &mut Vec<f64>, regret: f64) -> Result<()> {
    let regret = match regret {
        r if r >= 0.0 => r,
        r if r > -1e-9 => 0.0,
        r => return Err(Error::InvariantViolation(format!("negative instantaneous regret {r}"))),
    };
    let prev = cumulative.last().copied().unwrap_or(0.0);
    cumulative.push(prev + regret);
    Ok(())
}

/// Runs a graph-feedback policy for `horizon` rounds. Regret is measured
/// against `baseline`, the best feasible decision value. `observer` sees the
/// policy after each round's update.
pub fn run_graph_policy<P, F>(
    policy: &mut P,
    instance: &GraphBanditInstance,
    horizon: usize,
    seed: u64,
    baseline: f64,
    mut observer: F,
) -> Result<Vec<f64>>
where
    P: GraphPolicy + ?Sized,
    F: FnMut(usize, &P, &RoundOutcome) -> Result<()>,
{
    let mut rng = stream(seed, StreamPurpose::Rewards);
    let mut cumulative = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let decision = policy.select()?;
        let outcome = instance
            .sample_round(&decision, &mut rng)
            .map_err(|e| Error::InvariantViolation(format!("round {}: {e}", t + 1)))?;
        let value: f64 = decision.iter().map(|a| instance.means()[a]).sum();
        accumulate(&mut cumulative, baseline - value)?;
        policy.observe(&outcome)?;
        observer(t, policy, &outcome)?;
    }
    Ok(cumulative)
}

/// Runs a linear contextual policy for `horizon` rounds.
pub fn run_linear_policy<P, F>(
    policy: &mut P,
    instance: &LinearBanditInstance,
    horizon: usize,
    seed: u64,
    mut observer: F,
) -> Result<Vec<f64>>
where
    P: LinearPolicy + ?Sized,
    F: FnMut(usize, &P, &Contexts, &RoundOutcome) -> Result<()>,
{
    let mut ctx_rng = stream(seed, StreamPurpose::Contexts);
    let mut rew_rng = stream(seed, StreamPurpose::Rewards);
    let mut cumulative = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let contexts = instance.contexts_for_round(t, &mut ctx_rng);
        let decision = policy.select(&contexts)?;
        let outcome = instance
            .sample_round(&contexts, &decision, &mut rew_rng)
            .map_err(|e| Error::InvariantViolation(format!("round {}: {e}", t + 1)))?;
        accumulate(&mut cumulative, outcome.instantaneous_regret)?;
        policy.observe(&contexts, &outcome)?;
        observer(t, policy, &contexts, &outcome)?;
    }
    Ok(cumulative)
}

/// A validated config with its instance loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub instance: Instance,
    pub instance_label: String,
    decisions: Option<DecisionSet>,
}

impl Experiment {
    pub fn from_config(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let (instance, instance_label) = match &config.instance {
            InstanceRef::Inline(spec) => (Instance::from_file_spec(spec, &config.base_dir)?, "inline".to_string()),
            InstanceRef::Path(p) => {
                let path = config.base_dir.join(p);
                let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                (Instance::load(&path)?, label)
            }
        };
        let decisions = match (&config.policy, &instance) {
            (PolicySpec::HierElim, Instance::Graph(_)) => {
                return Err(Error::Config("hier-elim needs a linear instance".into()))
            }
            (PolicySpec::CombElim | PolicySpec::CombUcb { .. } | PolicySpec::ConstrainedElim { .. }, Instance::Linear(_)) => {
                return Err(Error::Config(format!("{} needs a graph instance", config.policy.id())))
            }
            (PolicySpec::ConstrainedElim { decisions }, Instance::Graph(g)) => {
                let set = match decisions {
                    DecisionsRef::Inline(raw) => DecisionSet::new(raw.clone(), g.num_arms())?,
                    DecisionsRef::Path(p) => DecisionSet::load(&config.base_dir.join(p), g.num_arms())?,
                };
                if set.budget() != g.budget() {
                    return Err(Error::Config(format!(
                        "decisions have {} arms, instance budget is {}",
                        set.budget(),
                        g.budget()
                    )));
                }
                Some(set)
            }
            _ => None,
        };
        Ok(Self { config, instance, instance_label, decisions })
    }

    fn graph_policy(&self, inst: &GraphBanditInstance, horizon: usize) -> Result<(Box<dyn GraphPolicy>, f64)> {
        let delta = self.config.delta;
        let optimum = |decision: &ArmSubset| decision.iter().map(|a| inst.means()[a]).sum::<f64>();
        Ok(match (&self.config.policy, &self.decisions) {
            (PolicySpec::CombElim, _) => (
                Box::new(CombArmElimination::new(inst.graph().clone(), inst.budget(), horizon, delta)?),
                optimum(&inst.optimal_decision()),
            ),
            (PolicySpec::CombUcb { width_l }, _) => {
                let l = match width_l {
                    Some(l) => *l,
                    None => log_width_param(inst.num_arms(), horizon, delta)?.sqrt(),
                };
                (Box::new(CombUcb::new(inst.num_arms(), inst.budget(), l)?), optimum(&inst.optimal_decision()))
            }
            (PolicySpec::ConstrainedElim { .. }, Some(set)) => {
                let best = set.get(set.best(inst.means())).clone();
                (
                    Box::new(ConstrainedElimination::new(set.clone(), inst.graph().clone(), horizon, delta)?),
                    optimum(&best),
                )
            }
            (PolicySpec::Oracle, _) => {
                let best = inst.optimal_decision();
                let value = optimum(&best);
                (Box::new(GraphOracle::new(best)), value)
            }
            _ => return Err(Error::Internal("policy and instance checked at load".into())),
        })
    }

    /// One run at `(seed, horizon)`.
    pub fn run_single(&self, seed: u64, horizon: usize) -> Result<RegretTrace> {
        let started = Instant::now();
        let mut debug = self.config.trace.then(DebugTrace::default);
        let cumulative = match &self.instance {
            Instance::Graph(inst) => {
                let (mut policy, baseline) = self.graph_policy(inst, horizon)?;
                run_graph_policy(policy.as_mut(), inst, horizon, seed, baseline, |t, p, _| {
                    if let (Some(d), Some(row)) = (debug.as_mut(), p.trace_row()) {
                        d.push(t, row);
                    }
                    Ok(())
                })?
            }
            Instance::Linear(inst) => {
                let mut record = |t: usize, p: &dyn LinearPolicy| {
                    if let Some(d) = debug.as_mut() {
                        for row in p.trace_rows() {
                            d.push(t, row);
                        }
                    }
                };
                match self.config.policy {
                    PolicySpec::HierElim => {
                        let mut policy =
                            HierarchicalElimination::new(inst.num_arms(), inst.dimension(), inst.budget(), horizon)?;
                        let cumulative = run_linear_policy(&mut policy, inst, horizon, seed, |t, p, _, _| {
                            record(t, p);
                            Ok(())
                        })?;
                        check_elliptical_potential(&policy)?;
                        cumulative
                    }
                    _ => {
                        let mut policy = LinearOracle::new(inst.theta_star().to_vec(), inst.budget());
                        run_linear_policy(&mut policy, inst, horizon, seed, |t, p, _, _| {
                            record(t, p);
                            Ok(())
                        })?
                    }
                }
            }
        };
        let meta = TraceMeta {
            policy: self.config.policy.id().to_string(),
            instance: self.instance_label.clone(),
            seed,
            horizon,
            delta: self.config.delta,
            final_regret: cumulative.last().copied().unwrap_or(0.0),
            wall_time_secs: started.elapsed().as_secs_f64(),
        };
        Ok(RegretTrace { meta, cumulative, debug })
    }

    /// Every `(seed, horizon)` cell, in config order (horizon-major).
    pub fn run_all(&self) -> Result<Vec<RegretTrace>> {
        let cells: Vec<(u64, usize)> = self
            .config
            .horizons
            .iter()
            .flat_map(|&t| self.config.seeds.iter().map(move |&s| (s, t)))
            .collect();
        let work = || cells.par_iter().map(|&(s, t)| self.run_single(s, t)).collect::<Result<Vec<_>>>();
        match self.config.workers {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
                .install(work),
            None => work(),
        }
    }
}

/// Hard check that each stage's realized elliptical potential stays under
/// its bound.
pub fn check_elliptical_potential(policy: &HierarchicalElimination) -> Result<()> {
    let bound = policy.elliptical_bound();
    for (h, stage) in policy.stages().iter().enumerate() {
        if stage.potential() > bound {
            return Err(Error::InvariantViolation(format!(
                "stage {} elliptical potential {} exceeds {bound}",
                h + 1,
                stage.potential()
            )));
        }
    }
    Ok(())
}

pub fn run_experiment(config: ExperimentConfig) -> Result<Vec<RegretTrace>> {
    Experiment::from_config(config)?.run_all()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// File stem shared by a trace's CSV and JSON files.
pub fn trace_stem(meta: &TraceMeta) -> String {
    format!("{}_{}_T{}_seed{}", meta.policy, meta.instance, meta.horizon, meta.seed)
}

/// Writes `<stem>.csv` (`t,cum_regret`) and `<stem>.json`, plus
/// `<stem>_debug.csv` when debug rows were recorded. Returns the CSV path.
pub fn write_trace(dir: &Path, trace: &RegretTrace, subsample: bool) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let stem = trace_stem(&trace.meta);
    let horizon = trace.cumulative.len();
    let step = if subsample { horizon.div_ceil(SUBSAMPLE_POINTS).max(1) } else { 1 };
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["t", "cum_regret"])?;
    for (i, value) in trace.cumulative.iter().enumerate() {
        let t = i + 1;
        if t % step == 0 || t == horizon {
            csv.write_record([t.to_string(), value.to_string()])?;
        }
    }
    let csv_path = dir.join(format!("{stem}.csv"));
    write_atomic(&csv_path, &csv.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
    write_atomic(&dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&trace.meta)?.as_bytes())?;
    if let Some(debug) = trace.debug.as_ref().filter(|d| !d.rows.is_empty()) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&debug.columns)?;
        for row in &debug.rows {
            w.write_record(row.iter().map(f64::to_string))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write_atomic(&dir.join(format!("{stem}_debug.csv")), &bytes)?;
    }
    Ok(csv_path)
}

/// Reads every trace sidecar in `dir`, sorted by file name.
pub fn load_sidecars(dir: &Path) -> Result<Vec<TraceMeta>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        match serde_json::from_str::<TraceMeta>(&fs::read_to_string(&p)?) {
            Ok(meta) => out.push(meta),
            Err(e) => log::debug!("skipping {}: {e}", p.display()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingModel {
    /// `log R = a + b log T`; `b` is the exponent.
    #[serde(rename = "sqrtT")]
    SqrtT,
    /// `R = a + b log T`; `b` is the slope.
    #[serde(rename = "logT")]
    LogT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: ScalingModel,
    pub horizons: Vec<usize>,
    pub mean_final_regret: Vec<f64>,
    pub intercept: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    /// `slope ± 2·stderr`.
    pub band: (f64, f64),
    /// Largest `|mean − fitted| / fitted` over horizons, in regret units.
    pub max_relative_residual: f64,
}

impl ScalingFit {
    pub fn fitted(&self, horizon: usize) -> f64 {
        let y = self.intercept + self.slope * (horizon as f64).ln();
        match self.model {
            ScalingModel::SqrtT => y.exp(),
            ScalingModel::LogT => y,
        }
    }
}

/// Least-squares fit of mean final regret against `log T`.
/// `points` are `(horizon, final regret)` pairs, one per run.
pub fn scaling_summary(points: &[(usize, f64)], model: ScalingModel) -> Result<ScalingFit> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(t, r) in points {
        groups.entry(t).or_default().push(r);
    }
    if groups.len() < MIN_FIT_HORIZONS {
        return Err(Error::Analysis(format!("need {MIN_FIT_HORIZONS} horizons, got {}", groups.len())));
    }
    if let Some((t, runs)) = groups.iter().find(|(_, v)| v.len() < MIN_FIT_SEEDS) {
        return Err(Error::Analysis(format!("horizon {t} has {} runs, need {MIN_FIT_SEEDS}", runs.len())));
    }
    let horizons: Vec<usize> = groups.keys().copied().collect();
    let means: Vec<f64> = groups.values().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    let xs: Vec<f64> = horizons.iter().map(|&t| (t as f64).ln()).collect();
    let ys: Vec<f64> = match model {
        ScalingModel::SqrtT => {
            if means.iter().any(|&m| m.is_nan() || m <= 0.0) {
                return Err(Error::Analysis("power-law fit needs positive mean regret".into()));
            }
            means.iter().map(|m| m.ln()).collect()
        }
        ScalingModel::LogT => means.clone(),
    };
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(Error::Analysis("horizons have zero spread".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = (sse / (n - 2.0) / sxx).sqrt();
    let mut fit = ScalingFit {
        model,
        horizons,
        mean_final_regret: means,
        intercept,
        slope,
        slope_stderr,
        band: (slope - 2.0 * slope_stderr, slope + 2.0 * slope_stderr),
        max_relative_residual: 0.0,
    };
    fit.max_relative_residual = fit
        .horizons
        .iter()
        .zip(&fit.mean_final_regret)
        .map(|(&t, &m)| {
            let f = fit.fitted(t);
            if f == 0.0 {
                if m == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                ((m - f) / f).abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(fit)
}

/// Fits of both models for one `(policy, instance)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub policy: String,
    pub instance: String,
    pub runs: usize,
    pub sqrt_t: std::result::Result<ScalingFit, String>,
    pub log_t: std::result::Result<ScalingFit, String>,
}

/// Groups sidecars by policy and instance and fits both models to each group.
pub fn summarize(metas: &[TraceMeta]) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<(String, String), Vec<(usize, f64)>> = BTreeMap::new();
    for m in metas {
        groups.entry((m.policy.clone(), m.instance.clone())).or_default().push((m.horizon, m.final_regret));
    }
    groups
        .into_iter()
        .map(|((policy, instance), points)| GroupSummary {
            policy,
            instance,
            runs: points.len(),
            sqrt_t: scaling_summary(&points, ScalingModel::SqrtT).map_err(|e| e.to_string()),
            log_t: scaling_summary(&points, ScalingModel::LogT).map_err(|e| e.to_string()),
        })
        .collect()
}
