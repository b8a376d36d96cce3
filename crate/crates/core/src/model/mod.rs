//! Building a distribution over symbolic option models from a trace.
//!
//! The pipeline: per-transition masks, factors of variables that always
//! change together, symbols per factor by density clustering, symbolized
//! observations, per-option partitions of start states by hierarchical
//! clustering of their effects, and precondition models over the factor
//! subset with the highest evidence.

mod distribution;
mod factors;
mod partition;
mod precondition;
mod summary;
mod symbolic;
mod symbols;

use thiserror::Error;

use crate::bayes::{BayesError, BetaBernoulli};
use crate::trace::OptionId;

pub use distribution::{
    build_model, distance_k, EffectComponent, EffectKind, ModelDistribution, OptionModel, PlanEvaluation,
    PreconditionComponent, SampledModel, SupportCache, SymbolicObservation,
};
pub use factors::{find_factors, find_masks, Factor, ObservedMasks};
pub use partition::{classifier_factors, mask_state, match_partition, partition_option, PartitionGroup};
pub use precondition::{select_precondition_factors, PreconditionFit};
pub use summary::summary;
pub use symbolic::{Outcome, SymbolicAvailability, SymbolicTrace, SymbolicTransition};
pub use symbols::{dbscan, find_symbols, SymbolTable, Symbolizer};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("cannot build a model from an empty trace")]
    EmptyLog,
    #[error("{expected} mask thresholds expected, {found} given")]
    ThresholdCount { expected: usize, found: usize },
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("sampled models do not share the distribution's structure")]
    StructureMismatch,
    #[error("unknown option {0}")]
    UnknownOption(OptionId),
    #[error(transparent)]
    Bayes(#[from] BayesError),
}

/// Set of state-variable indices, sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Mask(pub Vec<usize>);

impl Mask {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One symbol id per factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolicState(pub Vec<u32>);

impl std::fmt::Display for SymbolicState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Per-variable change thresholds; a single entry applies to every variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds(Vec<f64>);

impl Thresholds {
    pub fn uniform(t: f64) -> Self {
        Self(vec![t])
    }

    pub fn per_variable(ts: Vec<f64>) -> Self {
        Self(ts)
    }

    pub fn get(&self, i: usize) -> f64 {
        if self.0.len() == 1 {
            self.0[0]
        } else {
            self.0[i]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    fn check(&self, dim: usize) -> Result<(), ModelError> {
        if self.0.iter().any(|t| !(*t > 0.0)) {
            return Err(ModelError::InvalidConfig("mask thresholds must be positive".into()));
        }
        if self.0.len() != 1 && dim > 0 && self.0.len() != dim {
            return Err(ModelError::ThresholdCount {
                expected: dim,
                found: self.0.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub mask_thresholds: Thresholds,
    /// Clustering radius.
    pub epsilon: f64,
    pub min_samples: usize,
    /// Dirichlet concentration for effects and for hierarchical clustering.
    pub alpha: f64,
    /// Parameter of the geometric support-size prior.
    pub geom_p: f64,
    /// Concentration of the hierarchical clustering prior.
    pub bhc_kappa: f64,
    /// Probability that an unexecuted state joins its most similar partition.
    pub q_o: f64,
    pub precondition_prior: BetaBernoulli,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            mask_thresholds: Thresholds::uniform(1.0),
            epsilon: 1.5,
            min_samples: 1,
            alpha: 0.5,
            geom_p: 0.5,
            bhc_kappa: 1.0,
            q_o: 0.3,
            precondition_prior: BetaBernoulli::uniform(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.into()));
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if self.min_samples == 0 {
            return bad("min_samples must be at least 1");
        }
        if !(self.alpha > 0.0) || !(self.bhc_kappa > 0.0) {
            return bad("alpha and bhc_kappa must be positive");
        }
        if !(self.geom_p > 0.0 && self.geom_p < 1.0) {
            return bad("geom_p must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.q_o) {
            return bad("q_o must lie in [0, 1]");
        }
        self.mask_thresholds.check(0)
    }
}
