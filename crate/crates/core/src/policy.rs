//! The select → observe interface shared by every policy.

use crate::arms::ArmSubset;
use crate::environments::{Contexts, RoundOutcome};
use crate::error::Result;

/// A policy for graph-feedback environments.
pub trait GraphPolicy {
    fn name(&self) -> &'static str;

    fn select(&mut self) -> Result<ArmSubset>;

    fn observe(&mut self, outcome: &RoundOutcome) -> Result<()>;

    /// Debug columns for the per-round trace, if the policy has any.
    fn trace_row(&self) -> Option<Vec<(&'static str, f64)>> {
        None
    }
}

/// A policy for linear contextual environments.
pub trait LinearPolicy {
    fn name(&self) -> &'static str;

    fn select(&mut self, contexts: &Contexts) -> Result<ArmSubset>;

    fn observe(&mut self, contexts: &Contexts, outcome: &RoundOutcome) -> Result<()>;

    fn trace_rows(&self) -> Vec<Vec<(&'static str, f64)>> {
        Vec::new()
    }
}

/// Running empirical mean and observation count of one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ArmStats {
    pub mean: f64,
    pub count: u64,
}

impl ArmStats {
    pub fn record(&mut self, reward: f64) {
        self.count += 1;
        self.mean += (reward - self.mean) / self.count as f64;
    }

    pub fn is_observed(&self) -> bool {
        self.count > 0
    }
}

/// Records every observed reward of `outcome` into `stats`.
pub fn record_outcome(stats: &mut [ArmStats], outcome: &RoundOutcome) {
    for &(arm, reward) in &outcome.observed {
        stats[arm].record(reward);
    }
}
