//! Combinatorial UCB over all size-S decisions.
//!
//! With every S-subset feasible, the argmax of the summed per-arm index
//! `r̄ + L/sqrt(n)` is the top S arms by individual index.

use crate::arms::ArmSubset;
use crate::environments::RoundOutcome;
use crate::error::{Error, Result};
use crate::policy::{record_outcome, ArmStats, GraphPolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    stats: Vec<ArmStats>,
    width_l: f64,
}

impl UcbState {
    pub fn new(num_arms: usize, width_l: f64) -> Result<Self> {
        if !(width_l > 0.0 && width_l.is_finite()) {
            return Err(Error::Config(format!("UCB width L must be positive, got {width_l}")));
        }
        Ok(Self { stats: vec![ArmStats::default(); num_arms], width_l })
    }

    pub fn stats(&self) -> &[ArmStats] {
        &self.stats
    }

    pub fn width_l(&self) -> f64 {
        self.width_l
    }

    /// `r̄ + L/sqrt(n)`, infinite for unobserved arms.
    pub fn index(&self, arm: usize) -> f64 {
        let s = &self.stats[arm];
        if s.count == 0 {
            f64::INFINITY
        } else {
            s.mean + self.width_l / (s.count as f64).sqrt()
        }
    }

    pub fn ucb_select(&self, budget: usize) -> Result<ArmSubset> {
        let k = self.stats.len();
        if budget == 0 || budget > k {
            return Err(Error::Precondition(format!("budget {budget} invalid for {k} arms")));
        }
        let indices: Vec<f64> = (0..k).map(|a| self.index(a)).collect();
        let mut order: Vec<usize> = (0..k).collect();
        let by_index = |a: &usize, b: &usize| indices[*b].total_cmp(&indices[*a]).then(a.cmp(b));
        if budget < k {
            order.select_nth_unstable_by(budget - 1, by_index);
        }
        Ok(ArmSubset::new(order.into_iter().take(budget)))
    }

    pub fn ucb_observe(&mut self, outcome: &RoundOutcome) {
        record_outcome(&mut self.stats, outcome);
    }
}

#[derive(Debug, Clone)]
pub struct CombUcb {
    state: UcbState,
    budget: usize,
}

impl CombUcb {
    pub fn new(num_arms: usize, budget: usize, width_l: f64) -> Result<Self> {
        Ok(Self { state: UcbState::new(num_arms, width_l)?, budget })
    }

    pub fn state(&self) -> &UcbState {
        &self.state
    }
}

impl GraphPolicy for CombUcb {
    fn name(&self) -> &'static str {
        "comb-ucb"
    }

    fn select(&mut self) -> Result<ArmSubset> {
        self.state.ucb_select(self.budget)
    }

    fn observe(&mut self, outcome: &RoundOutcome) -> Result<()> {
        self.state.ucb_observe(outcome);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{GraphBanditInstance, RewardKind};
    use crate::feedback_graph::FeedbackGraph;
    use crate::rng::{stream, StreamPurpose};
    use proptest::prelude::*;

    fn state(means: &[f64], counts: &[u64], l: f64) -> UcbState {
        let mut s = UcbState::new(means.len(), l).unwrap();
        for (a, (&m, &c)) in means.iter().zip(counts).enumerate() {
            s.stats[a] = ArmStats { mean: m, count: c };
        }
        s
    }

    #[test]
    fn select_examples() {
        let s = state(&[0.9, 0.2, 0.1], &[5, 5, 5], 1.0);
        assert_eq!(s.ucb_select(2).unwrap(), ArmSubset::new([0, 1]));
        let s = state(&[0.9, 0.2, 0.0], &[5, 5, 0], 1.0);
        assert_eq!(s.ucb_select(1).unwrap(), ArmSubset::new([2]));
        let s = state(&[0.5, 0.5], &[1, 4], 1.0);
        assert!((s.index(0) - 1.5).abs() < 1e-12 && (s.index(1) - 1.0).abs() < 1e-12);
        assert_eq!(s.ucb_select(1).unwrap(), ArmSubset::new([0]));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let s = state(&[0.0; 5], &[0; 5], 1.0);
        assert_eq!(s.ucb_select(3).unwrap(), ArmSubset::new([0, 1, 2]));
    }

    #[test]
    fn rejects_bad_width() {
        assert!(UcbState::new(3, 0.0).is_err());
        assert!(UcbState::new(3, f64::NAN).is_err());
    }

    #[test]
    fn observe_examples() {
        let mut s = UcbState::new(3, 1.0).unwrap();
        let out = |r: f64| RoundOutcome {
            chosen: ArmSubset::new([1]),
            observed: vec![(1, r)],
            instantaneous_regret: 0.0,
        };
        s.ucb_observe(&out(1.0));
        assert_eq!(s.stats[1], ArmStats { mean: 1.0, count: 1 });
        s.ucb_observe(&out(0.0));
        assert_eq!(s.stats[1], ArmStats { mean: 0.5, count: 2 });
    }

    #[test]
    fn clique_feedback_counts_every_member() {
        let graph = FeedbackGraph::consecutive_cliques(&[3, 2]).unwrap();
        let inst = GraphBanditInstance::new(vec![0.5; 5], graph, 1, RewardKind::Bernoulli).unwrap();
        let mut policy = CombUcb::new(5, 1, 1.0).unwrap();
        let v = policy.select().unwrap();
        assert_eq!(v, ArmSubset::new([0]));
        let out = inst.sample_round(&v, &mut stream(0, StreamPurpose::Rewards)).unwrap();
        policy.observe(&out).unwrap();
        let counts: Vec<u64> = policy.state().stats().iter().map(|s| s.count).collect();
        assert_eq!(counts, vec![1, 1, 1, 0, 0]);
    }

    fn brute_force_argmax(s: &UcbState, budget: usize) -> f64 {
        let k = s.stats.len();
        (0u32..1 << k)
            .filter(|m| m.count_ones() as usize == budget)
            .map(|m| (0..k).filter(|a| m >> a & 1 == 1).map(|a| s.index(a)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    proptest! {
        #[test]
        fn top_s_matches_exhaustive_argmax(
            k in 2usize..=6,
            s in 1usize..=3,
            means in proptest::collection::vec(0.0f64..1.0, 6),
            counts in proptest::collection::vec(1u64..20, 6),
            l in 0.1f64..3.0,
        ) {
            let s = s.min(k);
            let st = state(&means[..k], &counts[..k], l);
            let chosen = st.ucb_select(s).unwrap();
            let value: f64 = chosen.iter().map(|a| st.index(a)).sum();
            prop_assert!((value - brute_force_argmax(&st, s)).abs() < 1e-9);
        }
    }
}
