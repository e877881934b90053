//! Decision-level elimination when only a fixed list of decisions may be played.
//!
//! Epochs cover the arms of the least-observed active decisions with the
//! out-neighborhoods of as few decisions as the greedy set cover finds, play
//! that cover once, then drop decisions whose empirical sum trails the best
//! by more than `2S·w(N)`.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use crate::arms::ArmSubset;
use crate::environments::RoundOutcome;
use crate::error::{Error, Result};
use crate::feedback_graph::{full_mask, k_subsets, FeedbackGraph};
use crate::graph_elimination::log_width_param;
use crate::policy::{record_outcome, ArmStats, GraphPolicy};

pub const MAX_KAPPA_ARMS: usize = 14;
pub const MAX_KAPPA_DECISIONS: usize = 12;
pub const MAX_EXACT_COVER_DECISIONS: usize = 20;

/// The allowed decisions, all of the same size `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionSet {
    decisions: Vec<ArmSubset>,
    num_arms: usize,
}

impl DecisionSet {
    pub fn new(raw: Vec<Vec<usize>>, num_arms: usize) -> Result<Self> {
        let Some(first) = raw.first() else {
            return Err(Error::Config("decision set is empty".into()));
        };
        let budget = first.len();
        if budget == 0 {
            return Err(Error::Config("decisions must contain at least one arm".into()));
        }
        let mut decisions = Vec::with_capacity(raw.len());
        for (i, arms) in raw.into_iter().enumerate() {
            let n = arms.len();
            let subset = ArmSubset::new(arms);
            if subset.len() != n {
                return Err(Error::Config(format!("decision {i} repeats an arm")));
            }
            if n != budget {
                return Err(Error::Config(format!("decision {i} has {n} arms, expected {budget}")));
            }
            subset
                .validate(num_arms)
                .map_err(|e| Error::Config(format!("decision {i}: {e}")))?;
            decisions.push(subset);
        }
        Ok(Self { decisions, num_arms })
    }

    /// `K/S` disjoint consecutive decisions.
    pub fn partition(num_arms: usize, budget: usize) -> Result<Self> {
        if budget == 0 || !num_arms.is_multiple_of(budget) {
            return Err(Error::Config(format!("{num_arms} arms do not split into blocks of {budget}")));
        }
        let raw = (0..num_arms / budget).map(|b| (b * budget..(b + 1) * budget).collect()).collect();
        Self::new(raw, num_arms)
    }

    pub fn from_json_str(text: &str, num_arms: usize) -> Result<Self> {
        let raw: Vec<Vec<usize>> = serde_json::from_str(text)?;
        Self::new(raw, num_arms)
    }

    pub fn load(path: &Path, num_arms: usize) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?, num_arms)
    }

    pub fn to_json(&self) -> String {
        let raw: Vec<&[usize]> = self.decisions.iter().map(|d| d.as_slice()).collect();
        serde_json::to_string(&raw).expect("plain integer lists serialize")
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn budget(&self) -> usize {
        self.decisions[0].len()
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn decisions(&self) -> &[ArmSubset] {
        &self.decisions
    }

    pub fn get(&self, index: usize) -> &ArmSubset {
        &self.decisions[index]
    }

    pub fn value(&self, index: usize, means: &[f64]) -> f64 {
        self.decisions[index].iter().map(|a| means[a]).sum()
    }

    /// Index of the decision with the largest true value, ties to lower index.
    pub fn best(&self, means: &[f64]) -> usize {
        (0..self.len())
            .fold((0, f64::NEG_INFINITY), |best, i| {
                let v = self.value(i, means);
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            })
            .0
    }

    fn reach_sets(&self, graph: &FeedbackGraph) -> Result<Vec<ArmSubset>> {
        if graph.num_arms() != self.num_arms {
            return Err(Error::Config(format!(
                "decision set over {} arms, graph has {}",
                self.num_arms,
                graph.num_arms()
            )));
        }
        self.decisions.iter().map(|d| graph.out_neighbors(d)).collect()
    }
}

/// Active decisions, epoch count `N` and per-arm statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionElimState {
    active: Vec<usize>,
    min_count: u64,
    stats: Vec<ArmStats>,
    width_param: f64,
}

impl DecisionElimState {
    pub fn new(decisions: &DecisionSet, horizon: usize, delta: f64) -> Result<Self> {
        Ok(Self {
            active: (0..decisions.len()).collect(),
            min_count: 0,
            stats: vec![ArmStats::default(); decisions.num_arms()],
            width_param: log_width_param(decisions.num_arms(), horizon, delta)?,
        })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn stats(&self) -> &[ArmStats] {
        &self.stats
    }

    pub fn width(&self, n: u64) -> f64 {
        if n == 0 {
            f64::INFINITY
        } else {
            (self.width_param / n as f64).sqrt()
        }
    }

    /// `n_V = min_{a∈V} n_a`.
    pub fn decision_count(&self, decision: &ArmSubset) -> u64 {
        decision.iter().map(|a| self.stats[a].count).min().unwrap_or(0)
    }

    /// `r̄_V = Σ_{a∈V} r̄_a`.
    pub fn decision_mean(&self, decision: &ArmSubset) -> f64 {
        decision.iter().map(|a| self.stats[a].mean).sum()
    }

    /// `U_t`: arms of active decisions observed exactly `N` times.
    pub fn least_observed_arms(&self, decisions: &DecisionSet) -> ArmSubset {
        let mut out = ArmSubset::empty();
        for &i in &self.active {
            let d = decisions.get(i);
            if self.decision_count(d) == self.min_count {
                out = out.union(d);
            }
        }
        out
    }

    pub fn observe(&mut self, outcome: &RoundOutcome) {
        record_outcome(&mut self.stats, outcome);
    }
}

/// Greedy cover of `U_t` by out-neighborhoods of decisions from the full list.
pub fn epoch_cover(state: &DecisionElimState, decisions: &DecisionSet, graph: &FeedbackGraph) -> Result<Vec<usize>> {
    if state.active.is_empty() {
        return Err(Error::Precondition("no active decisions".into()));
    }
    let target = state.least_observed_arms(decisions);
    greedy_decision_cover(&target, &decisions.reach_sets(graph)?)
}

fn greedy_decision_cover(target: &ArmSubset, reach: &[ArmSubset]) -> Result<Vec<usize>> {
    let mut uncovered = target.clone();
    let mut cover = Vec::new();
    while !uncovered.is_empty() {
        let (pick, gain) = reach
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.intersection(&uncovered).len()))
            .fold((0, 0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if gain == 0 {
            return Err(Error::Internal(format!("arms {uncovered} reachable by no decision")));
        }
        uncovered = uncovered.difference(&reach[pick]);
        cover.push(pick);
    }
    Ok(cover)
}

/// Sets `N` to the least active decision count and drops decisions trailing
/// the best active empirical sum by more than `2S·w(N)`.
pub fn decision_eliminate(state: &mut DecisionElimState, decisions: &DecisionSet) {
    let n = state
        .active
        .iter()
        .map(|&i| state.decision_count(decisions.get(i)))
        .min()
        .expect("active decisions are never empty");
    state.min_count = n;
    let sums: Vec<(usize, f64)> = state
        .active
        .iter()
        .map(|&i| (i, state.decision_mean(decisions.get(i))))
        .collect();
    let best = sums.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let threshold = best - 2.0 * decisions.budget() as f64 * state.width(n);
    state.active = sums.into_iter().filter(|&(_, v)| v >= threshold).map(|(i, _)| i).collect();
}

/// Worst-case minimum decision cover over arm subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kappa {
    Finite(usize),
    /// Some arm lies in no decision's out-neighborhood. `reachable` is the
    /// worst case over subsets of reachable arms, the only ones that can
    /// ever need covering.
    Infinite { reachable: usize },
}

impl Kappa {
    /// The value that governs the run: κ over reachable arms.
    pub fn effective(&self) -> usize {
        match *self {
            Kappa::Finite(v) | Kappa::Infinite { reachable: v } => v,
        }
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Finite(v) => write!(f, "{v}"),
            Kappa::Infinite { reachable } => write!(f, "inf ({reachable} over reachable arms)"),
        }
    }
}

fn reach_masks(decisions: &DecisionSet, graph: &FeedbackGraph) -> Result<Vec<u64>> {
    Ok(decisions
        .reach_sets(graph)?
        .iter()
        .map(|r| r.iter().fold(0u64, |m, a| m | 1 << a))
        .collect())
}

fn min_cover_masks(goal: u64, masks: &[u64]) -> Option<usize> {
    if goal == 0 {
        return Some(0);
    }
    (1..=masks.len()).find(|&size| {
        k_subsets(masks.len(), size).any(|subset| {
            let mut covered = 0u64;
            let mut rest = subset;
            while rest != 0 {
                covered |= masks[rest.trailing_zeros() as usize];
                rest &= rest - 1;
            }
            covered & goal == goal
        })
    })
}

/// Exact κ. Minimum cover size is monotone in the target, so the maximum over
/// subsets is attained by the set of all reachable arms.
pub fn kappa_exact(decisions: &DecisionSet, graph: &FeedbackGraph) -> Result<Kappa> {
    let (k, m) = (decisions.num_arms(), decisions.len());
    if k > MAX_KAPPA_ARMS || m > MAX_KAPPA_DECISIONS {
        return Err(Error::Capability(format!(
            "exact kappa limited to {MAX_KAPPA_ARMS} arms and {MAX_KAPPA_DECISIONS} decisions (got {k}, {m})"
        )));
    }
    let masks = reach_masks(decisions, graph)?;
    let reachable = masks.iter().fold(0, |acc, m| acc | m);
    let value = min_cover_masks(reachable, &masks).expect("the full list covers its own reach");
    Ok(if reachable == full_mask(k) {
        Kappa::Finite(value)
    } else {
        Kappa::Infinite { reachable: value }
    })
}

/// Exact minimum number of decisions covering `target`, for checking greedy covers.
pub fn exact_min_decision_cover(target: &ArmSubset, decisions: &DecisionSet, graph: &FeedbackGraph) -> Result<Option<usize>> {
    if decisions.len() > MAX_EXACT_COVER_DECISIONS || decisions.num_arms() > 64 {
        return Err(Error::Capability(format!(
            "exact decision cover limited to {MAX_EXACT_COVER_DECISIONS} decisions and 64 arms"
        )));
    }
    target.validate(decisions.num_arms())?;
    let goal = target.iter().fold(0u64, |m, a| m | 1 << a);
    Ok(min_cover_masks(goal, &reach_masks(decisions, graph)?))
}

#[derive(Debug, Clone)]
pub struct ConstrainedElimination {
    state: DecisionElimState,
    decisions: DecisionSet,
    graph: FeedbackGraph,
    queue: VecDeque<usize>,
    epochs: usize,
}

impl ConstrainedElimination {
    pub fn new(decisions: DecisionSet, graph: FeedbackGraph, horizon: usize, delta: f64) -> Result<Self> {
        decisions.reach_sets(&graph)?;
        Ok(Self {
            state: DecisionElimState::new(&decisions, horizon, delta)?,
            decisions,
            graph,
            queue: VecDeque::new(),
            epochs: 0,
        })
    }

    pub fn state(&self) -> &DecisionElimState {
        &self.state
    }

    pub fn decisions(&self) -> &DecisionSet {
        &self.decisions
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }
}

impl GraphPolicy for ConstrainedElimination {
    fn name(&self) -> &'static str {
        "constrained-elim"
    }

    fn select(&mut self) -> Result<ArmSubset> {
        if self.queue.is_empty() {
            self.queue = epoch_cover(&self.state, &self.decisions, &self.graph)?.into();
        }
        let next = self.queue.front().copied().expect("cover of a nonempty target");
        Ok(self.decisions.get(next).clone())
    }

    fn observe(&mut self, outcome: &RoundOutcome) -> Result<()> {
        let played = self
            .queue
            .pop_front()
            .ok_or_else(|| Error::Internal("observe called before select".into()))?;
        if outcome.chosen != *self.decisions.get(played) {
            return Err(Error::InvariantViolation("outcome does not match the queued decision".into()));
        }
        self.state.observe(outcome);
        if self.queue.is_empty() {
            let previous = self.state.min_count;
            decision_eliminate(&mut self.state, &self.decisions);
            if self.state.min_count <= previous {
                return Err(Error::InvariantViolation(format!(
                    "epoch ended with minimum count {} not above {previous}",
                    self.state.min_count
                )));
            }
            self.epochs += 1;
        }
        Ok(())
    }

    fn trace_row(&self) -> Option<Vec<(&'static str, f64)>> {
        Some(vec![
            ("active_decisions", self.state.active.len() as f64),
            ("min_count", self.state.min_count as f64),
            ("epoch", self.epochs as f64),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{GraphBanditInstance, RewardKind};
    use crate::rng::{stream, StreamPurpose};
    use proptest::prelude::*;
    use rand::Rng;

    fn with_means(decisions: &DecisionSet, means: &[f64], count: u64) -> DecisionElimState {
        let mut st = DecisionElimState::new(decisions, 100, 0.05).unwrap();
        for (s, &m) in st.stats.iter_mut().zip(means) {
            *s = ArmStats { mean: m, count };
        }
        st
    }

    #[test]
    fn decision_set_validation() {
        assert!(DecisionSet::new(vec![], 4).is_err());
        assert!(DecisionSet::new(vec![vec![0, 1], vec![2]], 4).is_err());
        assert!(DecisionSet::new(vec![vec![0, 0]], 4).is_err());
        assert!(DecisionSet::new(vec![vec![0, 4]], 4).is_err());
        let d = DecisionSet::from_json_str("[[0,1],[3,2]]", 4).unwrap();
        assert_eq!(d.get(1), &ArmSubset::new([2, 3]));
        assert_eq!(DecisionSet::from_json_str(&d.to_json(), 4).unwrap(), d);
        assert!(DecisionSet::partition(10, 3).is_err());
    }

    #[test]
    fn cover_examples() {
        let parts = DecisionSet::partition(12, 3).unwrap();
        let st = DecisionElimState::new(&parts, 100, 0.05).unwrap();
        let loops = FeedbackGraph::self_loops_only(12).unwrap();
        assert_eq!(epoch_cover(&st, &parts, &loops).unwrap(), vec![0, 1, 2, 3]);
        let complete = FeedbackGraph::complete(12).unwrap();
        assert_eq!(epoch_cover(&st, &parts, &complete).unwrap(), vec![0]);
        // Only decision 2 is least observed; its own neighborhood suffices.
        let mut st = with_means(&parts, &[0.5; 12], 3);
        for a in 6..9 {
            st.stats[a].count = 1;
        }
        st.min_count = 1;
        assert_eq!(epoch_cover(&st, &parts, &loops).unwrap(), vec![2]);
    }

    #[test]
    fn eliminate_examples() {
        let d = DecisionSet::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        // w(N) = 0.125 so 2S·w(N) = 0.5.
        let mut st = with_means(&d, &[0.9, 0.9, 0.5, 0.5], 10);
        st.width_param = 0.125f64.powi(2) * 10.0;
        decision_eliminate(&mut st, &d);
        assert_eq!(st.active(), &[0]);

        let mut st = with_means(&d, &[0.6; 4], 10);
        decision_eliminate(&mut st, &d);
        assert_eq!(st.active(), &[0, 1]);

        let mut st = with_means(&d, &[1.0, 1.0, 0.0, 0.0], 1);
        assert!(2.0 * 2.0 * st.width(1) > 2.0);
        decision_eliminate(&mut st, &d);
        assert_eq!(st.active(), &[0, 1]);
    }

    #[test]
    fn kappa_examples() {
        let parts = DecisionSet::partition(12, 3).unwrap();
        let complete = FeedbackGraph::complete(12).unwrap();
        assert_eq!(kappa_exact(&parts, &complete).unwrap(), Kappa::Finite(1));
        let loops = FeedbackGraph::self_loops_only(12).unwrap();
        assert_eq!(kappa_exact(&parts, &loops).unwrap(), Kappa::Finite(4));
        let partial = DecisionSet::new(vec![vec![0, 1], vec![2, 3]], 5).unwrap();
        let loops5 = FeedbackGraph::self_loops_only(5).unwrap();
        let k = kappa_exact(&partial, &loops5).unwrap();
        assert_eq!(k, Kappa::Infinite { reachable: 2 });
        assert_eq!(k.effective(), 2);
        let big = DecisionSet::partition(15, 3).unwrap();
        assert!(matches!(
            kappa_exact(&big, &FeedbackGraph::self_loops_only(15).unwrap()),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn epochs_raise_the_minimum_count() {
        let parts = DecisionSet::partition(12, 3).unwrap();
        let graph = FeedbackGraph::self_loops_only(12).unwrap();
        let means: Vec<f64> = (0..12).map(|a| 0.2 + 0.05 * a as f64).collect();
        let inst = GraphBanditInstance::new(means, graph.clone(), 3, RewardKind::Bernoulli).unwrap();
        let mut policy = ConstrainedElimination::new(parts, graph, 2000, 0.05).unwrap();
        let mut rng = stream(3, StreamPurpose::Rewards);
        let mut last = 0;
        for _ in 0..2000 {
            let v = policy.select().unwrap();
            let out = inst.sample_round(&v, &mut rng).unwrap();
            let before = policy.epochs();
            policy.observe(&out).unwrap();
            if policy.epochs() > before {
                assert!(policy.state().min_count() > last);
                last = policy.state().min_count();
            }
            assert!(!policy.state().active().is_empty());
        }
        assert!(policy.state().active().contains(&3));
    }

    proptest! {
        #[test]
        fn greedy_cover_within_log_factor(seed in 0u64..500, k in 4usize..=10, m in 2usize..=8) {
            let mut rng = stream(seed, StreamPurpose::Instance);
            let s = 2;
            let raw: Vec<Vec<usize>> = (0..m)
                .map(|_| {
                    let a = rng.gen_range(0..k);
                    let b = (a + rng.gen_range(1..k)) % k;
                    vec![a, b]
                })
                .collect();
            let decisions = DecisionSet::new(raw, k).unwrap();
            let edges: Vec<(usize, usize)> = (0..k * 2).map(|_| (rng.gen_range(0..k), rng.gen_range(0..k))).collect();
            let graph = FeedbackGraph::new(k, edges).unwrap();
            let reach = decisions.reach_sets(&graph).unwrap();
            let reachable = reach.iter().fold(ArmSubset::empty(), |acc, r| acc.union(r));
            let target: ArmSubset = reachable.iter().filter(|_| rng.gen_bool(0.7)).collect();
            prop_assume!(!target.is_empty());
            let greedy = greedy_decision_cover(&target, &reach).unwrap();
            let exact = exact_min_decision_cover(&target, &decisions, &graph).unwrap().unwrap();
            prop_assert!(greedy.len() >= exact);
            prop_assert!(greedy.len() as f64 <= exact as f64 * (1.0 + (target.len() as f64).ln()) + 1e-9);
            let covered = greedy.iter().fold(ArmSubset::empty(), |acc, &i| acc.union(&reach[i]));
            prop_assert!(target.is_subset(&covered));
            prop_assert_eq!(s, decisions.budget());
        }
    }
}
