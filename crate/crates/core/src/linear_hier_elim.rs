//! Hierarchical arm elimination for combinatorial linear contextual bandits.
//!
//! Each round rebuilds the decision from scratch over `H = ⌈log₂ sqrt(ST)⌉`
//! stages. Stage `h` fits a ridge regression on its own buffer only and:
//!
//! 1. adds arms whose width exceeds `2^-h` (under-explored),
//! 2. adds arms whose estimate beats the benchmark by `4·2^-h` (confirmed),
//! 3. keeps for stage `h+1` the arms within `2·2^-h` of the benchmark.
//!
//! Arms added in steps 1–2 of stage `h` are the only ones whose feedback
//! enters stage `h`'s buffer. That choice never looks at the rewards it is
//! about to store, which is what keeps each stage's rewards conditionally
//! independent given the contexts.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::arms::ArmSubset;
use crate::environments::{Contexts, RoundOutcome};
use crate::error::{Error, Result};
use crate::policy::LinearPolicy;

pub const RIDGE_LAMBDA: f64 = 1.0;

/// `β = sqrt(ln(2KT))`.
pub fn ridge_beta(num_arms: usize, horizon: usize) -> f64 {
    (2.0 * num_arms as f64 * horizon as f64).ln().sqrt()
}

/// `H = ⌈log₂ sqrt(ST)⌉`, at least one stage.
pub fn num_stages(budget: usize, horizon: usize) -> usize {
    let h = (budget as f64 * horizon as f64).sqrt().log2().ceil();
    (h as usize).max(1)
}

/// Right-hand side of the elliptical potential bound:
/// `sqrt(10)·ln(T+1)·(sqrt(dT) + d·sqrt(S))`.
pub fn elliptical_potential_bound(dim: usize, horizon: usize, budget: usize) -> f64 {
    let (d, t, s) = (dim as f64, horizon as f64, budget as f64);
    10f64.sqrt() * (t + 1.0).ln() * ((d * t).sqrt() + d * s.sqrt())
}

/// Ridge regression state `A = λI + Σ xxᵀ`, `z = Σ r x`, `θ̂ = A⁻¹z`.
///
/// The Cholesky factor is refreshed by [`RidgeState::refit`] after new data.
#[derive(Debug, Clone)]
pub struct RidgeState {
    gram: DMatrix<f64>,
    response: DVector<f64>,
    regularizer: f64,
    beta: f64,
    factor: Cholesky<f64, Dyn>,
    theta_hat: DVector<f64>,
    stale: bool,
}

impl RidgeState {
    pub fn new(dim: usize, regularizer: f64, beta: f64) -> Result<Self> {
        if dim == 0 || regularizer.is_nan() || regularizer <= 0.0 {
            return Err(Error::Config("ridge needs d > 0 and λ > 0".into()));
        }
        let gram = DMatrix::identity(dim, dim) * regularizer;
        let factor = Cholesky::new(gram.clone())
            .ok_or_else(|| Error::Numeric("λI is not positive definite".into()))?;
        Ok(Self {
            gram,
            response: DVector::zeros(dim),
            regularizer,
            beta,
            factor,
            theta_hat: DVector::zeros(dim),
            stale: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.response.len()
    }

    pub fn regularizer(&self) -> f64 {
        self.regularizer
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn push(&mut self, x: &[f64], reward: f64) {
        let x = DVector::from_column_slice(x);
        self.gram.ger(1.0, &x, &x, 1.0);
        self.response.axpy(reward, &x, 1.0);
        self.stale = true;
    }

    pub fn refit(&mut self) -> Result<()> {
        if !self.stale {
            return Ok(());
        }
        self.factor = Cholesky::new(self.gram.clone())
            .ok_or_else(|| Error::Numeric("Gram matrix lost positive definiteness".into()))?;
        self.theta_hat = self.factor.solve(&self.response);
        if self.theta_hat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite ridge estimate".into()));
        }
        self.stale = false;
        Ok(())
    }

    pub fn theta_hat(&self) -> &[f64] {
        debug_assert!(!self.stale, "ridge state read before refit");
        self.theta_hat.as_slice()
    }

    pub fn gram_rows(&self) -> Vec<Vec<f64>> {
        self.gram.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// `θ̂ᵀx`.
    pub fn estimate(&self, x: &[f64]) -> f64 {
        self.theta_hat().iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `‖x‖²_{A⁻¹}`.
    pub fn inverse_quadratic(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        self.factor.solve(&v).dot(&v).max(0.0)
    }

    /// `2(λ+β)‖x‖_{A⁻¹}`.
    pub fn width(&self, x: &[f64]) -> f64 {
        2.0 * (self.regularizer + self.beta) * self.inverse_quadratic(x).sqrt()
    }
}

/// Fits a ridge state from `(context, reward)` pairs.
pub fn ridge_fit(pairs: &[(Vec<f64>, f64)], dim: usize, regularizer: f64, beta: f64) -> Result<RidgeState> {
    let mut state = RidgeState::new(dim, regularizer, beta)?;
    for (x, r) in pairs {
        if x.len() != dim {
            return Err(Error::Numeric(format!("context of dimension {} != {dim}", x.len())));
        }
        if !r.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite regression data".into()));
        }
        state.push(x, *r);
    }
    state.refit()?;
    Ok(state)
}

/// Estimated reward and confidence width of one arm at one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmEstimate {
    pub reward: f64,
    pub width: f64,
}

/// `(θ̂ᵀx, 2(λ+β)‖x‖_{A⁻¹})` for every arm's context.
pub fn stage_widths(state: &RidgeState, contexts: &Contexts) -> Vec<ArmEstimate> {
    contexts
        .iter()
        .map(|x| ArmEstimate { reward: state.estimate(x), width: state.width(x) })
        .collect()
}

/// One stored observation in a stage buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct StageEntry {
    pub round: usize,
    pub arm: usize,
    pub context: Vec<f64>,
    pub reward: f64,
}

/// The observations `Φ^(h)` that stage `h` learns from, with its ridge fit
/// and running elliptical potential.
#[derive(Debug, Clone)]
pub struct StageBuffer {
    entries: Vec<StageEntry>,
    ridge: RidgeState,
    potential: f64,
}

impl StageBuffer {
    fn new(dim: usize, beta: f64) -> Result<Self> {
        Ok(Self { entries: Vec::new(), ridge: RidgeState::new(dim, RIDGE_LAMBDA, beta)?, potential: 0.0 })
    }

    pub fn entries(&self) -> &[StageEntry] {
        &self.entries
    }

    pub fn ridge(&self) -> &RidgeState {
        &self.ridge
    }

    /// `Σ_t sqrt(Σ_{a∈Φ(t)} ‖x_{t,a}‖²_{A_t⁻¹})` over the rounds committed so far.
    pub fn potential(&self) -> f64 {
        self.potential
    }

    pub fn pairs(&self) -> Vec<(Vec<f64>, f64)> {
        self.entries.iter().map(|e| (e.context.clone(), e.reward)).collect()
    }

    fn commit_round(&mut self, round: usize, items: &[(usize, &[f64], f64)]) -> Result<()> {
        if items.is_empty() {
            return Ok(());
        }
        let sq: f64 = items.iter().map(|(_, x, _)| self.ridge.inverse_quadratic(x)).sum();
        self.potential += sq.sqrt();
        for &(arm, x, reward) in items {
            self.ridge.push(x, reward);
            self.entries.push(StageEntry { round, arm, context: x.to_vec(), reward });
        }
        self.ridge.refit()
    }
}

/// What happened at one stage while building a decision.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTrace {
    /// 1-based stage index.
    pub stage: usize,
    pub active: usize,
    pub under_explored: ArmSubset,
    pub confirmed: ArmSubset,
    pub max_width: f64,
    /// Whether the two benchmark arms of the stage coincided (diagnostic).
    pub benchmarks_agree: Option<bool>,
}

/// A round's decision and the stage each selected arm reports to.
#[derive(Debug, Clone, PartialEq)]
pub struct HierDecision {
    pub chosen: ArmSubset,
    /// `(arm, stage)` with 0-based stage index; fill-in arms are absent.
    pub assignments: Vec<(usize, usize)>,
    pub fill_in: ArmSubset,
    pub stages: Vec<StageTrace>,
}

impl HierDecision {
    pub fn stage_of(&self, arm: usize) -> Option<usize> {
        self.assignments.iter().find(|&&(a, _)| a == arm).map(|&(_, h)| h)
    }
}

/// `m`-th (1-based) arm of `candidates` by descending `r̂ + w`, ties to lower
/// index. Clamped to the last candidate when fewer than `m` remain.
fn mth_by_upper_bound(candidates: &ArmSubset, est: &[ArmEstimate], m: usize) -> Option<usize> {
    let mut order: Vec<usize> = candidates.iter().collect();
    order.sort_by(|&a, &b| {
        let (ua, ub) = (est[a].reward + est[a].width, est[b].reward + est[b].width);
        ub.total_cmp(&ua).then(a.cmp(&b))
    });
    order.get(m.min(order.len()).checked_sub(1)?).copied()
}

/// Keeps at most `room` arms, preferring larger `key`, ties to lower index.
fn truncate_by(set: ArmSubset, room: usize, key: impl Fn(usize) -> f64) -> ArmSubset {
    if set.len() <= room {
        return set;
    }
    let mut order = set.into_vec();
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    ArmSubset::new(order.into_iter().take(room))
}

#[derive(Debug, Clone)]
pub struct HierarchicalElimination {
    num_arms: usize,
    budget: usize,
    dim: usize,
    horizon: usize,
    stages: Vec<StageBuffer>,
    round: usize,
    pending: Option<HierDecision>,
    last_stages: Vec<StageTrace>,
}

impl HierarchicalElimination {
    pub fn new(num_arms: usize, dim: usize, budget: usize, horizon: usize) -> Result<Self> {
        if budget == 0 || budget > num_arms {
            return Err(Error::Config(format!("budget {budget} invalid for {num_arms} arms")));
        }
        if horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        let beta = ridge_beta(num_arms, horizon);
        let stages = (0..num_stages(budget, horizon))
            .map(|_| StageBuffer::new(dim, beta))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { num_arms, budget, dim, horizon, stages, round: 0, pending: None, last_stages: Vec::new() })
    }

    pub fn stages(&self) -> &[StageBuffer] {
        &self.stages
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn elliptical_bound(&self) -> f64 {
        elliptical_potential_bound(self.dim, self.horizon, self.budget)
    }

    /// Builds this round's decision. Reads only the stage buffers, never the
    /// rewards of the round being decided.
    pub fn construct_decision(&self, contexts: &Contexts) -> Result<HierDecision> {
        if contexts.len() != self.num_arms || contexts.iter().any(|x| x.len() != self.dim) {
            return Err(Error::Precondition(format!(
                "expected {} contexts of dimension {}",
                self.num_arms, self.dim
            )));
        }
        let s = self.budget;
        let mut active = ArmSubset::full(self.num_arms);
        let mut chosen = ArmSubset::empty();
        let mut assignments = Vec::new();
        let mut traces = Vec::new();
        let mut last_estimates: Vec<ArmEstimate> = Vec::new();

        for (h, stage) in self.stages.iter().enumerate() {
            if chosen.len() == s {
                break;
            }
            let threshold = 0.5f64.powi(h as i32 + 1);
            let est = stage_widths(&stage.ridge, contexts);
            let mut trace = StageTrace {
                stage: h + 1,
                active: active.len(),
                under_explored: ArmSubset::empty(),
                confirmed: ArmSubset::empty(),
                max_width: active.iter().map(|a| est[a].width).fold(0.0, f64::max),
                benchmarks_agree: None,
            };

            // (1) under-explored arms
            let candidates = active.difference(&chosen);
            let wide: ArmSubset = candidates.iter().filter(|&a| est[a].width > threshold).collect();
            let u1 = truncate_by(wide, s - chosen.len(), |a| est[a].width);
            for a in u1.iter() {
                chosen.insert(a);
                assignments.push((a, h));
            }
            trace.under_explored = u1;
            if chosen.len() == s {
                traces.push(trace);
                break;
            }

            // (2) confirmed arms
            let candidates = active.difference(&chosen);
            let room = s - chosen.len();
            let bench1 = mth_by_upper_bound(&candidates, &est, room).ok_or_else(|| {
                Error::InvariantViolation(format!(
                    "stage {}: {} candidates for {room} open slots",
                    h + 1,
                    candidates.len()
                ))
            })?;
            let cutoff = est[bench1].reward + 4.0 * threshold;
            let strong: ArmSubset = candidates.iter().filter(|&a| est[a].reward > cutoff).collect();
            let u2 = truncate_by(strong, room, |a| est[a].reward);
            for a in u2.iter() {
                chosen.insert(a);
                assignments.push((a, h));
            }
            trace.confirmed = u2;
            if chosen.len() == s {
                traces.push(trace);
                break;
            }

            // (3) elimination for the next stage
            let candidates = active.difference(&chosen);
            let room = s - chosen.len();
            let bench2 = mth_by_upper_bound(&candidates, &est, room).ok_or_else(|| {
                Error::InvariantViolation(format!("stage {}: benchmark undefined", h + 1))
            })?;
            trace.benchmarks_agree = Some(bench1 == bench2);
            if bench1 != bench2 {
                log::debug!("round {} stage {}: benchmarks {bench1} and {bench2} differ", self.round, h + 1);
            }
            let floor = est[bench2].reward - 2.0 * threshold;
            active = candidates.iter().filter(|&a| est[a].reward >= floor).collect();
            traces.push(trace);
            last_estimates = est;
            // `active` now plays the role of A_{h+1}; keep A_H for the fill.
            if h + 1 == self.stages.len() {
                active = candidates;
            }
        }

        let mut fill_in = ArmSubset::empty();
        if chosen.len() < s {
            let pool = active.difference(&chosen);
            let limit = 1.0 / ((s * self.horizon) as f64).sqrt();
            let mut order: Vec<usize> = pool.iter().collect();
            order.sort_by(|&a, &b| {
                last_estimates[b].reward.total_cmp(&last_estimates[a].reward).then(a.cmp(&b))
            });
            for a in order.into_iter().take(s - chosen.len()) {
                if last_estimates[a].width > limit + 1e-12 {
                    log::warn!(
                        "round {}: fill-in arm {a} has width {} > 1/sqrt(ST) = {limit}",
                        self.round,
                        last_estimates[a].width
                    );
                }
                chosen.insert(a);
                fill_in.insert(a);
            }
        }
        if chosen.len() != s {
            return Err(Error::InvariantViolation(format!(
                "decision has {} arms, budget is {s}",
                chosen.len()
            )));
        }
        Ok(HierDecision { chosen, assignments, fill_in, stages: traces })
    }

    /// Appends each assigned arm's feedback to its stage buffer; fill-in arms
    /// are discarded.
    pub fn observe_and_commit(
        &mut self,
        decision: &HierDecision,
        contexts: &Contexts,
        outcome: &RoundOutcome,
    ) -> Result<()> {
        let mut per_stage: Vec<Vec<(usize, &[f64], f64)>> = vec![Vec::new(); self.stages.len()];
        for &(arm, h) in &decision.assignments {
            let reward = outcome.reward(arm).ok_or_else(|| {
                Error::InvariantViolation(format!("no reward observed for assigned arm {arm}"))
            })?;
            per_stage[h].push((arm, contexts[arm].as_slice(), reward));
        }
        for (stage, items) in self.stages.iter_mut().zip(&per_stage) {
            stage.commit_round(self.round, items)?;
        }
        self.round += 1;
        Ok(())
    }
}

impl LinearPolicy for HierarchicalElimination {
    fn name(&self) -> &'static str {
        "hier-elim"
    }

    fn select(&mut self, contexts: &Contexts) -> Result<ArmSubset> {
        let decision = self.construct_decision(contexts)?;
        let chosen = decision.chosen.clone();
        self.pending = Some(decision);
        Ok(chosen)
    }

    fn observe(&mut self, contexts: &Contexts, outcome: &RoundOutcome) -> Result<()> {
        let decision = self
            .pending
            .take()
            .ok_or_else(|| Error::Internal("observe called before select".into()))?;
        self.observe_and_commit(&decision, contexts, outcome)?;
        self.last_stages = decision.stages;
        Ok(())
    }

    /// One row per stage visited in the last completed round.
    fn trace_rows(&self) -> Vec<Vec<(&'static str, f64)>> {
        self.last_stages
            .iter()
            .map(|st| {
                vec![
                    ("stage", st.stage as f64),
                    ("active", st.active as f64),
                    ("u1", st.under_explored.len() as f64),
                    ("u2", st.confirmed.len() as f64),
                    ("max_width", st.max_width),
                ]
            })
            .collect()
    }
}
