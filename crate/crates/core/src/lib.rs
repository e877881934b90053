//! Arm-elimination algorithms for combinatorial semi-bandits with graph
//! feedback, combinatorial linear contextual bandits, and constrained
//! decision sets, plus the simulation harness that evaluates them.

pub mod arms;
pub mod comb_ucb;
pub mod constrained_elim;
pub mod environments;
pub mod error;
pub mod feedback_graph;
pub mod graph_elimination;
pub mod harness;
pub mod linalg_oracle;
pub mod linear_hier_elim;
pub mod policy;
pub mod rng;

pub use arms::ArmSubset;
pub use comb_ucb::CombUcb;
pub use constrained_elim::{kappa_exact, ConstrainedElimination, DecisionSet, Kappa};
pub use environments::{
    Contexts, GraphBanditInstance, Instance, InstanceFile, LinearBanditInstance, RewardKind, RoundOutcome,
};
pub use error::{Error, Result};
pub use feedback_graph::{FeedbackGraph, GraphStats};
pub use graph_elimination::CombArmElimination;
pub use harness::{ExperimentConfig, PolicySpec, RegretTrace, ScalingModel};
pub use linear_hier_elim::HierarchicalElimination;
pub use policy::{GraphPolicy, LinearPolicy};
