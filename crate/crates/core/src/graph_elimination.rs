//! Combinatorial arm elimination under graph feedback.
//!
//! Arms are partitioned into confirmed, active and eliminated. Confirmed arms
//! are always played; the remaining budget explores the least-observed active
//! arms, picking by largest out-degree so that each pull reveals as many
//! under-observed arms as possible. Whenever the minimum active count `N`
//! grows, arms far above the S-th empirical best are confirmed and arms far
//! below it are eliminated, both against the uniform width `w(N)`.

use std::cmp::Ordering;

use crate::arms::ArmSubset;
use crate::environments::RoundOutcome;
use crate::error::{Error, Result};
use crate::feedback_graph::FeedbackGraph;
use crate::policy::{record_outcome, ArmStats, GraphPolicy};

/// `ln(2KT/δ)`, the numerator of the squared confidence width.
pub fn log_width_param(num_arms: usize, horizon: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta must lie in (0, 1), got {delta}")));
    }
    if horizon == 0 || num_arms == 0 {
        return Err(Error::Config("horizon and arm count must be positive".into()));
    }
    Ok((2.0 * num_arms as f64 * horizon as f64 / delta).ln())
}

/// Orders arms by empirical mean, best first. Unobserved arms sort last and
/// ties go to the lower index.
pub(crate) fn empirical_order(stats: &[ArmStats], a: usize, b: usize) -> Ordering {
    let (sa, sb) = (&stats[a], &stats[b]);
    sb.is_observed()
        .cmp(&sa.is_observed())
        .then_with(|| sb.mean.total_cmp(&sa.mean))
        .then(a.cmp(&b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationState {
    confirmed: ArmSubset,
    active: ArmSubset,
    min_count: u64,
    stats: Vec<ArmStats>,
    width_param: f64,
}

impl EliminationState {
    pub fn new(num_arms: usize, horizon: usize, delta: f64) -> Result<Self> {
        Ok(Self {
            confirmed: ArmSubset::empty(),
            active: ArmSubset::full(num_arms),
            min_count: 0,
            stats: vec![ArmStats::default(); num_arms],
            width_param: log_width_param(num_arms, horizon, delta)?,
        })
    }

    pub fn confirmed(&self) -> &ArmSubset {
        &self.confirmed
    }

    pub fn active(&self) -> &ArmSubset {
        &self.active
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn stats(&self) -> &[ArmStats] {
        &self.stats
    }

    pub fn width_param(&self) -> f64 {
        self.width_param
    }

    /// `w(n) = sqrt(ln(2KT/δ) / n)`; infinite when `n = 0`.
    pub fn width(&self, n: u64) -> f64 {
        if n == 0 {
            f64::INFINITY
        } else {
            (self.width_param / n as f64).sqrt()
        }
    }

    /// Confirmed arms plus `S − |confirmed|` greedy exploration picks.
    pub fn select_decision(&self, graph: &FeedbackGraph, budget: usize) -> Result<ArmSubset> {
        if self.confirmed.len() + self.active.len() < budget {
            return Err(Error::InvariantViolation(format!(
                "only {} uneliminated arms for a budget of {budget}",
                self.confirmed.len() + self.active.len()
            )));
        }
        if self.confirmed.len() > budget {
            return Err(Error::InvariantViolation(format!(
                "{} confirmed arms exceed the budget {budget}",
                self.confirmed.len()
            )));
        }
        let mut decision = self.confirmed.clone();
        // Elimination can remove every arm sitting at count N; the pool is
        // then the active arms at the current minimum, which is N otherwise.
        let floor = self
            .active
            .iter()
            .map(|a| self.stats[a].count)
            .min()
            .unwrap_or(self.min_count);
        let mut least_observed = self.active.clone();
        least_observed.retain(|a| self.stats[a].count == floor);
        while decision.len() < budget && !least_observed.is_empty() {
            let pick = graph.greedy_explore_pick(&least_observed)?;
            decision.insert(pick);
            for &b in graph.out(pick) {
                least_observed.remove(b);
            }
        }
        if decision.len() < budget {
            // The least-observed pool ran dry: pad with the least-observed
            // remaining active arms.
            let mut rest: Vec<usize> = self.active.iter().filter(|&a| !decision.contains(a)).collect();
            rest.sort_by_key(|&a| (self.stats[a].count, a));
            for a in rest.into_iter().take(budget - decision.len()) {
                decision.insert(a);
            }
        }
        if decision.len() < budget {
            let mut eliminated: Vec<usize> = (0..self.stats.len())
                .filter(|&a| !decision.contains(a) && !self.active.contains(a))
                .collect();
            eliminated.sort_by(|&a, &b| empirical_order(&self.stats, a, b));
            for a in eliminated.into_iter().take(budget - decision.len()) {
                decision.insert(a);
            }
        }
        Ok(decision)
    }

    /// Records the feedback and, if the minimum active count grew, applies
    /// confirmation and then elimination.
    pub fn observe_and_update(&mut self, outcome: &RoundOutcome, budget: usize) -> Result<()> {
        record_outcome(&mut self.stats, outcome);
        let Some(new_min) = self.active.iter().map(|a| self.stats[a].count).min() else {
            return Ok(());
        };
        if new_min <= self.min_count {
            return Ok(());
        }
        self.min_count = new_min;
        let w = self.width(new_min);
        let mut union: Vec<usize> = self.confirmed.union(&self.active).into_vec();
        if union.len() < budget {
            return Err(Error::InvariantViolation(format!(
                "S-th empirical best undefined: {} uneliminated arms for S={budget}",
                union.len()
            )));
        }
        union.sort_by(|&a, &b| empirical_order(&self.stats, a, b));
        let benchmark = self.stats[union[budget - 1]].mean;

        let newly: Vec<usize> = self
            .active
            .iter()
            .filter(|&a| self.stats[a].mean > benchmark + 4.0 * w)
            .collect();
        for a in newly {
            self.confirmed.insert(a);
            self.active.remove(a);
        }
        let stats = &self.stats;
        self.active.retain(|a| stats[a].mean >= benchmark - 2.0 * w);
        debug_assert!(self.confirmed.is_disjoint(&self.active));
        Ok(())
    }
}

/// Policy wrapper running [`EliminationState`] on a fixed graph.
#[derive(Debug, Clone)]
pub struct CombArmElimination {
    state: EliminationState,
    graph: FeedbackGraph,
    budget: usize,
}

impl CombArmElimination {
    pub fn new(graph: FeedbackGraph, budget: usize, horizon: usize, delta: f64) -> Result<Self> {
        if budget == 0 || budget > graph.num_arms() {
            return Err(Error::Config(format!("budget {budget} invalid for {} arms", graph.num_arms())));
        }
        Ok(Self {
            state: EliminationState::new(graph.num_arms(), horizon, delta)?,
            graph,
            budget,
        })
    }

    pub fn state(&self) -> &EliminationState {
        &self.state
    }
}

impl GraphPolicy for CombArmElimination {
    fn name(&self) -> &'static str {
        "comb-elim"
    }

    fn select(&mut self) -> Result<ArmSubset> {
        self.state.select_decision(&self.graph, self.budget)
    }

    fn observe(&mut self, outcome: &RoundOutcome) -> Result<()> {
        self.state.observe_and_update(outcome, self.budget)
    }

    fn trace_row(&self) -> Option<Vec<(&'static str, f64)>> {
        Some(vec![
            ("confirmed", self.state.confirmed.len() as f64),
            ("active", self.state.active.len() as f64),
            ("min_count", self.state.min_count as f64),
        ])
    }
}
