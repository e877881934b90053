//! Stochastic reward environments and named instance constructions.
//!
//! Regret is always expected (pseudo-)regret: the gap between the true mean
//! reward of the hindsight-optimal decision and that of the chosen one.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::arms::ArmSubset;
use crate::error::{Error, Result};
use crate::feedback_graph::{FeedbackGraph, GraphFile};
use crate::rng::BanditRng;

/// Per-round context vectors, one `d`-vector per arm.
pub type Contexts = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    Bernoulli,
    Deterministic,
}

/// What the learner sees after committing to a decision.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub chosen: ArmSubset,
    /// `(arm, reward)` pairs sorted by arm.
    pub observed: Vec<(usize, f64)>,
    pub instantaneous_regret: f64,
}

impl RoundOutcome {
    pub fn observed_arms(&self) -> ArmSubset {
        ArmSubset::new(self.observed.iter().map(|&(a, _)| a))
    }

    pub fn reward(&self, arm: usize) -> Option<f64> {
        self.observed
            .binary_search_by_key(&arm, |&(a, _)| a)
            .ok()
            .map(|i| self.observed[i].1)
    }
}

/// Indices of the `s` largest values, ties to the smallest index.
pub fn top_indices(values: &[f64], s: usize) -> ArmSubset {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    ArmSubset::new(order.into_iter().take(s))
}

fn top_sum(values: &[f64], s: usize) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.iter().take(s).sum()
}

fn check_decision(chosen: &ArmSubset, k: usize, s: usize) -> Result<()> {
    chosen.validate(k)?;
    if chosen.len() != s {
        return Err(Error::InvariantViolation(format!(
            "decision {chosen} has {} arms, budget is {s}",
            chosen.len()
        )));
    }
    Ok(())
}

/// Stochastic combinatorial bandit with graph feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphBanditInstance {
    means: Vec<f64>,
    graph: FeedbackGraph,
    budget: usize,
    reward_kind: RewardKind,
}

impl GraphBanditInstance {
    pub fn new(
        means: Vec<f64>,
        graph: FeedbackGraph,
        budget: usize,
        reward_kind: RewardKind,
    ) -> Result<Self> {
        if means.len() != graph.num_arms() {
            return Err(Error::Config(format!(
                "{} means for a graph over {} arms",
                means.len(),
                graph.num_arms()
            )));
        }
        if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::Config(format!("mean {m} outside [0, 1]")));
        }
        if budget == 0 || budget > means.len() {
            return Err(Error::Config(format!(
                "budget S={budget} must lie in [1, K={}]",
                means.len()
            )));
        }
        Ok(Self { means, graph, budget, reward_kind })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn graph(&self) -> &FeedbackGraph {
        &self.graph
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn reward_kind(&self) -> RewardKind {
        self.reward_kind
    }

    /// The hindsight-optimal decision: top-S means, ties to lower index.
    pub fn optimal_decision(&self) -> ArmSubset {
        top_indices(&self.means, self.budget)
    }

    pub fn optimal_value(&self) -> f64 {
        top_sum(&self.means, self.budget)
    }

    /// `μ_(S) − μ_(S+1)`, or `None` when S = K.
    pub fn gap(&self) -> Option<f64> {
        let mut sorted = self.means.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        sorted
            .get(self.budget)
            .map(|next| sorted[self.budget - 1] - next)
    }

    /// Fails unless the instance has a strictly positive margin.
    pub fn require_gap(&self) -> Result<f64> {
        match self.gap() {
            Some(g) if g > 0.0 => Ok(g),
            other => Err(Error::Config(format!(
                "gap-dependent analysis needs a positive margin, got {other:?}"
            ))),
        }
    }

    pub fn regret_of(&self, chosen: &ArmSubset) -> f64 {
        self.optimal_value() - chosen.iter().map(|a| self.means[a]).sum::<f64>()
    }

    /// One reward per arm for this round. All K rewards are drawn whatever
    /// the decision, so the reward stream does not depend on the policy.
    pub fn draw_rewards(&self, rng: &mut BanditRng) -> Vec<f64> {
        match self.reward_kind {
            RewardKind::Deterministic => self.means.clone(),
            RewardKind::Bernoulli => self
                .means
                .iter()
                .map(|&m| if rng.gen::<f64>() < m { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    /// Plays `chosen`, revealing rewards on `N_out(chosen)`.
    pub fn sample_round(&self, chosen: &ArmSubset, rng: &mut BanditRng) -> Result<RoundOutcome> {
        check_decision(chosen, self.num_arms(), self.budget)?;
        let rewards = self.draw_rewards(rng);
        let observed = self
            .graph
            .out_neighbors(chosen)?
            .iter()
            .map(|a| (a, rewards[a]))
            .collect();
        Ok(RoundOutcome {
            chosen: chosen.clone(),
            observed,
            instantaneous_regret: self.regret_of(chosen),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// `ε ~ U[−(1−|m|), 1−|m|]` around mean `m = θᵀx`.
    BoundedUniform,
    /// Reward in `{−1, +1}` with mean `m`.
    BernoulliShifted,
}

/// Where per-round contexts come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ContextSource {
    /// Same contexts every round.
    Fixed { contexts: Contexts },
    /// Independent uniform unit vectors for every arm and round.
    IidSphere { num_arms: usize },
    /// Recorded rounds, replayed cyclically.
    Replay { rounds: Vec<Contexts> },
}

/// Combinatorial linear contextual bandit with semi-bandit feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBanditInstance {
    theta_star: Vec<f64>,
    contexts: ContextSource,
    noise_kind: NoiseKind,
    budget: usize,
    num_arms: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const NORM_SLACK: f64 = 1e-9;

impl LinearBanditInstance {
    pub fn new(
        theta_star: Vec<f64>,
        contexts: ContextSource,
        noise_kind: NoiseKind,
        budget: usize,
    ) -> Result<Self> {
        let d = theta_star.len();
        if d == 0 {
            return Err(Error::Config("theta_star must be non-empty".into()));
        }
        if norm(&theta_star) > 1.0 + NORM_SLACK {
            return Err(Error::Config("theta_star must have norm at most 1".into()));
        }
        let check_round = |round: &Contexts| -> Result<usize> {
            for x in round {
                if x.len() != d {
                    return Err(Error::Config(format!("context of dimension {} != {d}", x.len())));
                }
                if norm(x) > 1.0 + NORM_SLACK {
                    return Err(Error::Config("context vectors must have norm at most 1".into()));
                }
            }
            Ok(round.len())
        };
        let num_arms = match &contexts {
            ContextSource::Fixed { contexts } => check_round(contexts)?,
            ContextSource::IidSphere { num_arms } => *num_arms,
            ContextSource::Replay { rounds } => {
                let first = rounds
                    .first()
                    .ok_or_else(|| Error::Config("replay needs at least one round".into()))?;
                let k = check_round(first)?;
                for round in rounds {
                    if check_round(round)? != k {
                        return Err(Error::Config("replay rounds differ in arm count".into()));
                    }
                }
                k
            }
        };
        if budget == 0 || budget > num_arms {
            return Err(Error::Config(format!(
                "budget S={budget} must lie in [1, K={num_arms}]"
            )));
        }
        Ok(Self { theta_star, contexts, noise_kind, budget, num_arms })
    }

    pub fn dimension(&self) -> usize {
        self.theta_star.len()
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.noise_kind
    }

    pub fn context_source(&self) -> &ContextSource {
        &self.contexts
    }

    /// Contexts for round `t` (0-based).
    pub fn contexts_for_round(&self, t: usize, rng: &mut BanditRng) -> Contexts {
        match &self.contexts {
            ContextSource::Fixed { contexts } => contexts.clone(),
            ContextSource::Replay { rounds } => rounds[t % rounds.len()].clone(),
            ContextSource::IidSphere { num_arms } => (0..*num_arms)
                .map(|_| random_unit_vector(self.dimension(), rng))
                .collect(),
        }
    }

    pub fn mean_rewards(&self, contexts: &Contexts) -> Vec<f64> {
        contexts.iter().map(|x| dot(&self.theta_star, x)).collect()
    }

    pub fn regret_of(&self, contexts: &Contexts, chosen: &ArmSubset) -> f64 {
        let means = self.mean_rewards(contexts);
        top_sum(&means, self.budget) - chosen.iter().map(|a| means[a]).sum::<f64>()
    }

    /// Plays `chosen` under the frozen `contexts`, revealing the chosen arms' rewards.
    pub fn sample_round(
        &self,
        contexts: &Contexts,
        chosen: &ArmSubset,
        rng: &mut BanditRng,
    ) -> Result<RoundOutcome> {
        check_decision(chosen, self.num_arms, self.budget)?;
        let means = self.mean_rewards(contexts);
        let rewards: Vec<f64> = means.iter().map(|&m| self.noisy(m, rng)).collect();
        Ok(RoundOutcome {
            chosen: chosen.clone(),
            observed: chosen.iter().map(|a| (a, rewards[a])).collect(),
            instantaneous_regret: self.regret_of(contexts, chosen),
        })
    }

    fn noisy(&self, mean: f64, rng: &mut BanditRng) -> f64 {
        let mean = mean.clamp(-1.0, 1.0);
        match self.noise_kind {
            NoiseKind::BoundedUniform => {
                let half = 1.0 - mean.abs();
                mean + half * (2.0 * rng.gen::<f64>() - 1.0)
            }
            NoiseKind::BernoulliShifted => {
                if rng.gen::<f64>() < (1.0 + mean) / 2.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

pub fn random_unit_vector(d: usize, rng: &mut BanditRng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Gap lower-bound family.
///
/// Arms `0..alpha` form an independent set `a_1..a_alpha` (each arm heads its
/// own clique; extra arms `alpha..K` are spread round-robin over the cliques).
/// Means: 1 on `a_1..a_{S-1}`, `1/4 + gap` on `a_S`, `1/4 + 2·gap` on `a_u`
/// when `u > S`, 1/4 on the rest of the independent set and 0 on extra arms.
/// `optimal_index` is the 1-based `u ∈ [S, alpha]`.
pub fn build_gap_instance(
    alpha: usize,
    budget: usize,
    num_arms: usize,
    gap: f64,
    optimal_index: usize,
) -> Result<GraphBanditInstance> {
    if budget == 0 || alpha < 2 * budget {
        return Err(Error::Config(format!("need alpha >= 2S (alpha={alpha}, S={budget})")));
    }
    if optimal_index < budget || optimal_index > alpha {
        return Err(Error::Config(format!("need S <= u <= alpha (u={optimal_index})")));
    }
    if !(gap > 0.0 && gap <= 0.25) {
        return Err(Error::Config(format!("need 0 < gap <= 1/4 (gap={gap})")));
    }
    if num_arms < alpha {
        return Err(Error::Config(format!("need K >= alpha (K={num_arms})")));
    }
    let mut blocks: Vec<Vec<usize>> = (0..alpha).map(|a| vec![a]).collect();
    for extra in alpha..num_arms {
        blocks[(extra - alpha) % alpha].push(extra);
    }
    let graph = FeedbackGraph::disjoint_cliques(num_arms, &blocks)?;
    let means = (0..num_arms)
        .map(|a| {
            let i = a + 1;
            if a >= alpha {
                0.0
            } else if i < budget {
                1.0
            } else if i == budget {
                0.25 + gap
            } else if optimal_index > budget && i == optimal_index {
                0.25 + 2.0 * gap
            } else {
                0.25
            }
        })
        .collect();
    GraphBanditInstance::new(means, graph, budget, RewardKind::Bernoulli)
}

/// Clique blocks on which combinatorial UCB explores one clique at a time.
///
/// Blocks `V_1..V_{alpha-1}` hold `S` consecutive arms each, the last block
/// holds the remaining `K − S(alpha−1)` arms. Block `k` (1-based) has the
/// deterministic reward `1/2 + 1[k=1]·Δ − (k−1)·ε` with
/// `Δ = L·sqrt(alpha/(4T))` and `ε = L·sqrt(1/(4·alpha·T))`; only the first
/// `S` arms of the last block get it, the extra arms there get 0.
pub fn build_ucb_failure_instance(
    budget: usize,
    alpha: usize,
    num_arms: usize,
    horizon: usize,
    width_l: f64,
) -> Result<GraphBanditInstance> {
    if alpha < 2 {
        return Err(Error::Config("need alpha > 1".into()));
    }
    if budget == 0 || budget * alpha > num_arms {
        return Err(Error::Config(format!(
            "need S·alpha <= K (S={budget}, alpha={alpha}, K={num_arms})"
        )));
    }
    if horizon == 0 || !(width_l > 0.0 && width_l.is_finite()) {
        return Err(Error::Config("need T > 0 and L > 0 so that ε > 0".into()));
    }
    let (big_delta, eps) = ucb_failure_margins(alpha, horizon, width_l);
    let mut sizes = vec![budget; alpha - 1];
    sizes.push(num_arms - budget * (alpha - 1));
    let graph = FeedbackGraph::consecutive_cliques(&sizes)?;
    let means: Vec<f64> = (0..num_arms)
        .map(|a| {
            let block = (a / budget).min(alpha - 1);
            let offset = a - block * budget;
            if block == alpha - 1 && offset >= budget {
                0.0
            } else {
                let bonus = if block == 0 { big_delta } else { 0.0 };
                0.5 + bonus - block as f64 * eps
            }
        })
        .collect();
    if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return Err(Error::Config(
            "L too large for the horizon: block rewards leave [0, 1]".into(),
        ));
    }
    GraphBanditInstance::new(means, graph, budget, RewardKind::Deterministic)
}

/// `(Δ, ε)` used by [`build_ucb_failure_instance`].
pub fn ucb_failure_margins(alpha: usize, horizon: usize, width_l: f64) -> (f64, f64) {
    let (a, t) = (alpha as f64, horizon as f64);
    (width_l * (a / (4.0 * t)).sqrt(), width_l * (1.0 / (4.0 * a * t)).sqrt())
}

/// Random means with a prescribed margin between the S-th and (S+1)-th arm.
///
/// The top `S` means are drawn from `[0.55, 0.9]` with the S-th pinned at
/// 0.55 and the (S+1)-th at `0.55 − gap`; the other arms sit in
/// `[0.55 − 2·gap, 0.55 − gap]`, so every suboptimal arm is within `2·gap`
/// of the S-th best.
pub fn random_margin_means(
    num_arms: usize,
    budget: usize,
    gap: f64,
    rng: &mut BanditRng,
) -> Result<Vec<f64>> {
    if budget == 0 || budget >= num_arms || !(gap > 0.0 && gap <= 0.25) {
        return Err(Error::Config("need 1 <= S < K and 0 < gap <= 1/4".into()));
    }
    let pivot = 0.55;
    let mut means: Vec<f64> = (0..num_arms)
        .map(|i| {
            if i + 1 < budget {
                rng.gen_range(pivot..0.9)
            } else if i + 1 == budget {
                pivot
            } else if i == budget {
                pivot - gap
            } else {
                pivot - gap * (1.0 + rng.gen::<f64>())
            }
        })
        .collect();
    // Arm identities carry no information; shuffle so index order is not a hint.
    for i in (1..num_arms).rev() {
        means.swap(i, rng.gen_range(0..=i));
    }
    Ok(means)
}

/// Graph reference inside an instance file: inline or a path to a graph file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphRef {
    Inline(GraphFile),
    Path(PathBuf),
}

/// JSON instance description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceFile {
    Graph {
        means: Vec<f64>,
        graph: GraphRef,
        #[serde(rename = "S")]
        budget: usize,
        #[serde(default = "default_reward_kind")]
        reward_kind: RewardKind,
    },
    Linear {
        theta_star: Vec<f64>,
        contexts: ContextSource,
        #[serde(rename = "S")]
        budget: usize,
        noise_kind: NoiseKind,
    },
}

fn default_reward_kind() -> RewardKind {
    RewardKind::Bernoulli
}

/// A loaded environment.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Graph(GraphBanditInstance),
    Linear(LinearBanditInstance),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Graph(_) => "graph",
            Instance::Linear(_) => "linear",
        }
    }

    pub fn budget(&self) -> usize {
        match self {
            Instance::Graph(g) => g.budget(),
            Instance::Linear(l) => l.budget(),
        }
    }

    pub fn num_arms(&self) -> usize {
        match self {
            Instance::Graph(g) => g.num_arms(),
            Instance::Linear(l) => l.num_arms(),
        }
    }

    /// Resolves a parsed file; relative graph paths are taken from `base_dir`.
    pub fn from_file_spec(spec: &InstanceFile, base_dir: &Path) -> Result<Self> {
        match spec {
            InstanceFile::Graph { means, graph, budget, reward_kind } => {
                let graph = match graph {
                    GraphRef::Inline(g) => {
                        let (graph, added) = FeedbackGraph::from_file_spec(g)?;
                        if added {
                            log::warn!("inline graph: self-loops missing, added automatically");
                        }
                        graph
                    }
                    GraphRef::Path(p) => FeedbackGraph::load(&base_dir.join(p))?,
                };
                Ok(Instance::Graph(GraphBanditInstance::new(
                    means.clone(),
                    graph,
                    *budget,
                    *reward_kind,
                )?))
            }
            InstanceFile::Linear { theta_star, contexts, budget, noise_kind } => Ok(
                Instance::Linear(LinearBanditInstance::new(
                    theta_star.clone(),
                    contexts.clone(),
                    *noise_kind,
                    *budget,
                )?),
            ),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let spec: InstanceFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_file_spec(&spec, base)
    }

    pub fn to_file_spec(&self) -> InstanceFile {
        match self {
            Instance::Graph(g) => InstanceFile::Graph {
                means: g.means.clone(),
                graph: GraphRef::Inline(g.graph.to_file_spec()),
                budget: g.budget,
                reward_kind: g.reward_kind,
            },
            Instance::Linear(l) => InstanceFile::Linear {
                theta_star: l.theta_star.clone(),
                contexts: l.contexts.clone(),
                budget: l.budget,
                noise_kind: l.noise_kind,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamPurpose};

    fn rng() -> BanditRng {
        stream(11, StreamPurpose::Rewards)
    }

    fn deterministic(means: Vec<f64>, s: usize) -> GraphBanditInstance {
        let k = means.len();
        GraphBanditInstance::new(
            means,
            FeedbackGraph::self_loops_only(k).unwrap(),
            s,
            RewardKind::Deterministic,
        )
        .unwrap()
    }

    #[test]
    fn graph_round_regret_examples() {
        let inst = deterministic(vec![0.9, 0.5, 0.1], 1);
        let out = inst.sample_round(&ArmSubset::new([0]), &mut rng()).unwrap();
        assert_eq!(out.instantaneous_regret, 0.0);
        let out = inst.sample_round(&ArmSubset::new([2]), &mut rng()).unwrap();
        assert!((out.instantaneous_regret - 0.8).abs() < 1e-12);
        let inst = deterministic(vec![0.9, 0.8, 0.3], 2);
        let out = inst.sample_round(&ArmSubset::new([0, 2]), &mut rng()).unwrap();
        assert!((out.instantaneous_regret - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wrong_decision_size_is_a_contract_violation() {
        let inst = deterministic(vec![0.9, 0.8, 0.3], 2);
        assert!(matches!(
            inst.sample_round(&ArmSubset::new([0]), &mut rng()),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn observed_set_is_out_neighborhood() {
        let graph = FeedbackGraph::new(4, [(0, 3), (1, 2)]).unwrap();
        let inst =
            GraphBanditInstance::new(vec![0.5; 4], graph.clone(), 1, RewardKind::Bernoulli).unwrap();
        let chosen = ArmSubset::new([0]);
        let out = inst.sample_round(&chosen, &mut rng()).unwrap();
        assert_eq!(out.observed_arms(), graph.out_neighbors(&chosen).unwrap());
        assert!(out.observed.iter().all(|&(_, r)| r == 0.0 || r == 1.0));
    }

    #[test]
    fn bernoulli_empirical_means_converge() {
        let means = vec![0.1, 0.35, 0.5, 0.8];
        let inst = GraphBanditInstance::new(
            means.clone(),
            FeedbackGraph::complete(4).unwrap(),
            1,
            RewardKind::Bernoulli,
        )
        .unwrap();
        let mut r = rng();
        let mut sums = [0.0; 4];
        let n = 100_000;
        for _ in 0..n {
            for (s, x) in sums.iter_mut().zip(inst.draw_rewards(&mut r)) {
                *s += x;
            }
        }
        for (s, m) in sums.iter().zip(&means) {
            assert!((s / n as f64 - m).abs() <= 0.01);
        }
    }

    #[test]
    fn linear_round_regret_examples() {
        let e = |i: usize| -> Vec<f64> { (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect() };
        let fixed = ContextSource::Fixed { contexts: vec![e(0), e(1), e(2)] };
        let inst = LinearBanditInstance::new(e(0), fixed, NoiseKind::BoundedUniform, 1).unwrap();
        let ctx = inst.contexts_for_round(0, &mut rng());
        let out = inst.sample_round(&ctx, &ArmSubset::new([0]), &mut rng()).unwrap();
        assert_eq!(out.instantaneous_regret, 0.0);

        let half = vec![0.5, 0.0, 0.0];
        let fixed = ContextSource::Fixed { contexts: vec![e(0), e(1), half] };
        let inst = LinearBanditInstance::new(e(0), fixed, NoiseKind::BoundedUniform, 2).unwrap();
        let ctx = inst.contexts_for_round(0, &mut rng());
        let out = inst.sample_round(&ctx, &ArmSubset::new([1, 2]), &mut rng()).unwrap();
        assert!((out.instantaneous_regret - 1.0).abs() < 1e-12);
        assert_eq!(out.observed_arms(), ArmSubset::new([1, 2]));

        let inst = LinearBanditInstance::new(
            vec![0.0; 3],
            ContextSource::IidSphere { num_arms: 5 },
            NoiseKind::BernoulliShifted,
            2,
        )
        .unwrap();
        let ctx = inst.contexts_for_round(0, &mut rng());
        let out = inst.sample_round(&ctx, &ArmSubset::new([3, 4]), &mut rng()).unwrap();
        assert_eq!(out.instantaneous_regret, 0.0);
    }

    #[test]
    fn linear_rewards_stay_bounded() {
        let mut r = rng();
        for noise in [NoiseKind::BoundedUniform, NoiseKind::BernoulliShifted] {
            let theta = random_unit_vector(4, &mut r);
            let inst =
                LinearBanditInstance::new(theta, ContextSource::IidSphere { num_arms: 6 }, noise, 3)
                    .unwrap();
            for t in 0..200 {
                let ctx = inst.contexts_for_round(t, &mut r);
                assert!(ctx.iter().all(|x| norm(x) <= 1.0 + 1e-12));
                let out = inst.sample_round(&ctx, &ArmSubset::new([0, 1, 2]), &mut r).unwrap();
                assert!(out.observed.iter().all(|&(_, y)| (-1.0..=1.0).contains(&y)));
            }
        }
    }

    #[test]
    fn linear_validation() {
        let bad = LinearBanditInstance::new(
            vec![1.0, 1.0],
            ContextSource::IidSphere { num_arms: 3 },
            NoiseKind::BoundedUniform,
            1,
        );
        assert!(matches!(bad, Err(Error::Config(_))));
        let bad = LinearBanditInstance::new(
            vec![1.0, 0.0],
            ContextSource::Fixed { contexts: vec![vec![2.0, 0.0]] },
            NoiseKind::BoundedUniform,
            1,
        );
        assert!(matches!(bad, Err(Error::Config(_))));
    }

    #[test]
    fn gap_instance_examples() {
        let (s, alpha, gap) = (3, 6, 0.25);
        let inst = build_gap_instance(alpha, s, 10, gap, s).unwrap();
        assert_eq!(&inst.means()[..alpha], &[1.0, 1.0, 0.5, 0.25, 0.25, 0.25]);
        assert!(inst.means()[alpha..].iter().all(|&m| m == 0.0));
        assert!((inst.gap().unwrap() - gap).abs() < 1e-12);
        assert_eq!(inst.optimal_decision(), ArmSubset::new([0, 1, 2]));
        assert_eq!(inst.graph().independence_number_exact().unwrap(), alpha);

        for u in s..=alpha {
            let inst = build_gap_instance(alpha, s, 8, 0.1, u).unwrap();
            assert_eq!(inst.means().iter().filter(|&&m| m == 1.0).count(), s - 1);
            if u > s {
                assert_eq!(inst.optimal_decision(), ArmSubset::new([0, 1, u - 1]));
                assert!((inst.gap().unwrap() - 0.1).abs() < 1e-12);
            }
        }
        assert!(build_gap_instance(5, 3, 8, 0.1, 3).is_err());
        assert!(build_gap_instance(6, 3, 8, 0.3, 3).is_err());
        assert!(build_gap_instance(6, 3, 8, 0.1, 7).is_err());
    }

    #[test]
    fn ucb_failure_instance_examples() {
        let (s, alpha, k, t, l) = (2, 2, 4, 100, 1.0);
        let inst = build_ucb_failure_instance(s, alpha, k, t, l).unwrap();
        let (big, eps) = ucb_failure_margins(alpha, t, l);
        assert!((big - (2.0f64 / 400.0).sqrt()).abs() < 1e-15);
        assert!((eps - (1.0f64 / 800.0).sqrt()).abs() < 1e-15);
        assert_eq!(inst.means(), &[0.5 + big, 0.5 + big, 0.5 - eps, 0.5 - eps]);
        assert_eq!(inst.graph().independence_number_exact().unwrap(), alpha);
        assert_eq!(inst.graph().out(0), &[0, 1]);

        let (s, alpha, k, t) = (3, 4, 14, 1000);
        let inst = build_ucb_failure_instance(s, alpha, k, t, 2.0).unwrap();
        let (big, eps) = ucb_failure_margins(alpha, t, 2.0);
        assert!((inst.means()[0] - (0.5 + big)).abs() < 1e-12);
        assert_eq!(inst.optimal_decision(), ArmSubset::new([0, 1, 2]));
        for block in 1..alpha {
            let v = ArmSubset::new(block * s..(block + 1) * s);
            let gap = s as f64 * (big + block as f64 * eps);
            assert!((inst.regret_of(&v) - gap).abs() < 1e-12);
        }
        assert_eq!(inst.means()[12], 0.0);
        assert_eq!(inst.graph().out(13).len(), 5);
        assert_eq!(inst.graph().independence_number_exact().unwrap(), alpha);
        assert!(build_ucb_failure_instance(4, 4, 15, 100, 1.0).is_err());
        assert!(build_ucb_failure_instance(4, 1, 15, 100, 1.0).is_err());
    }

    #[test]
    fn random_margin_means_has_requested_gap() {
        let mut r = rng();
        let means = random_margin_means(10, 3, 0.02, &mut r).unwrap();
        let inst = deterministic(means, 3);
        assert!((inst.gap().unwrap() - 0.02).abs() < 1e-12);
        let worst = inst.means().iter().cloned().fold(1.0, f64::min);
        assert!(worst >= 0.55 - 0.04 - 1e-12);
    }

    #[test]
    fn optimal_play_accumulates_zero_regret() {
        let inst = build_gap_instance(6, 2, 9, 0.1, 4).unwrap();
        let best = inst.optimal_decision();
        let mut r = rng();
        let total: f64 = (0..500)
            .map(|_| inst.sample_round(&best, &mut r).unwrap().instantaneous_regret)
            .sum();
        assert_eq!(total, 0.0);
    }

    #[test]
    fn instance_file_round_trip() {
        let inst = Instance::Graph(build_gap_instance(4, 2, 6, 0.1, 2).unwrap());
        let json = serde_json::to_string(&inst.to_file_spec()).unwrap();
        let parsed: InstanceFile = serde_json::from_str(&json).unwrap();
        assert_eq!(Instance::from_file_spec(&parsed, Path::new(".")).unwrap(), inst);

        let raw = r#"{"kind":"linear","theta_star":[0.6,0.8],"S":1,
            "noise_kind":"bernoulli_shifted","contexts":{"source":"iid_sphere","num_arms":4}}"#;
        let parsed: InstanceFile = serde_json::from_str(raw).unwrap();
        let inst = Instance::from_file_spec(&parsed, Path::new(".")).unwrap();
        assert_eq!(inst.kind(), "linear");
        assert_eq!(inst.num_arms(), 4);
    }
}
