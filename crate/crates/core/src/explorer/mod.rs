//! Active exploration over learned symbolic models.
//!
//! The active policy runs Monte-Carlo tree search over option sequences in
//! models sampled from the current [`ModelDistribution`], scoring each
//! simulated trajectory by how far its observations would move the posterior
//! mean toward the sampled model, minus a depth penalty that makes reaching
//! an unobserved transition early the dominant term. Random and greedy
//! baselines share the same run loop.
//!
//! [`ModelDistribution`]: crate::model::ModelDistribution

mod baselines;
mod mcts;
mod run;

use thiserror::Error;

use crate::envs::EnvError;
use crate::model::ModelError;

pub use baselines::{execution_counts, greedy_policy, random_policy};
pub use mcts::{
    mcts_decide, mcts_search, score_trajectory, simulate_step, uct_select, ChildStats, LazyModel, ScoreRange,
    SearchNode, SearchTree, SimulatedTrajectory, StepResult,
};
pub use run::{explore_run, Policy};

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("no options are available in the current state")]
    NoAvailableOptions,
    #[error("invalid exploration config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationConfig {
    /// Number of real option executions in a run.
    pub budget: usize,
    /// Simulations per decision.
    pub mcts_updates: usize,
    /// UCT exploration constant.
    pub uct_c: f64,
    /// Per-step penalty on simulated depth.
    pub z: f64,
    pub normalization: ScoreNormalization,
}

/// Which scores define the `[0, 1]` range used by UCT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreNormalization {
    /// Lowest and highest simulation scores seen so far in the search.
    Search,
    /// Lowest and highest mean scores among the node's visited children.
    Siblings,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        Self {
            budget: 150,
            mcts_updates: 1000,
            uct_c: 2.0,
            z: 10.0,
            normalization: ScoreNormalization::Search,
        }
    }
}

impl ExplorationConfig {
    pub fn validate(&self) -> Result<(), ExploreError> {
        if self.budget == 0 {
            return Err(ExploreError::InvalidConfig("budget must be at least 1".into()));
        }
        if self.mcts_updates == 0 {
            return Err(ExploreError::InvalidConfig("mcts_updates must be at least 1".into()));
        }
        if !(self.uct_c > 0.0 && self.uct_c.is_finite()) {
            return Err(ExploreError::InvalidConfig(format!("uct_c = {}", self.uct_c)));
        }
        if !(self.z >= 0.0 && self.z.is_finite()) {
            return Err(ExploreError::InvalidConfig(format!("z = {}", self.z)));
        }
        Ok(())
    }
}
