//! Option-level environments.
//!
//! Both worlds expose the same [`Environment`] contract used by the
//! explorer, plus a [`GroundTruth`] view of their discrete dynamics used by
//! the harness oracle and metrics.

pub mod asteroids;
pub mod geometry;
pub mod treasure;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::rng::RandomSource;
use crate::trace::{OptionId, StateVector};

pub use asteroids::{AsteroidSpec, AsteroidsConfig, AsteroidsWorld};
pub use treasure::{KeyState, TreasureConfig, TreasureState, TreasureWorld};

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("option {option} is not available in the current state")]
    Unavailable { option: OptionId },
    #[error("option {option} does not exist (environment has {count} options)")]
    UnknownOption { option: OptionId, count: usize },
    #[error("invalid layout: {0}")]
    Layout(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: StateVector,
    /// The option ended in a crash or a return to the start, and the world
    /// was reset.
    pub reset: bool,
}

pub trait Environment {
    fn num_options(&self) -> usize;
    fn option_name(&self, o: OptionId) -> String;
    fn dim(&self) -> usize;
    fn state(&self) -> &StateVector;
    fn reset(&mut self, rng: &mut RandomSource) -> StateVector;
    /// Options whose availability predicate holds at `s`; a pure function of `s`.
    fn available_options(&self, s: &StateVector) -> BTreeSet<OptionId>;
    fn execute_option(&mut self, o: OptionId, rng: &mut RandomSource) -> Result<StepOutcome, EnvError>;

    fn options(&self) -> Vec<OptionId> {
        (0..self.num_options()).map(OptionId).collect()
    }

    fn current_options(&self) -> BTreeSet<OptionId> {
        self.available_options(self.state())
    }
}

/// Discrete state of the world with one component per ground-truth factor.
pub type AbstractState = Vec<u32>;

/// Exact discrete dynamics behind an environment.
pub trait GroundTruth {
    /// Names of the abstract components, in order.
    fn component_names(&self) -> Vec<&'static str>;
    fn abstract_state(&self, s: &StateVector) -> AbstractState;
    fn abstract_start(&self) -> AbstractState;
    fn abstract_available(&self, a: &AbstractState) -> Vec<OptionId>;
    /// Outcome distribution of `o` from `a`; probabilities sum to one and
    /// every listed outcome has positive probability.
    fn abstract_outcomes(&self, a: &AbstractState, o: OptionId) -> Vec<(AbstractState, f64)>;
}

pub(crate) fn check_option(o: OptionId, count: usize) -> Result<(), EnvError> {
    if o.0 >= count {
        Err(EnvError::UnknownOption { option: o, count })
    } else {
        Ok(())
    }
}

/// Sample an index from a short list of `(item, probability)` pairs.
pub(crate) fn sample_outcome<'a, T>(outcomes: &'a [(T, f64)], rng: &mut RandomSource) -> &'a T {
    let u = rng.uniform();
    let mut acc = 0.0;
    for (x, p) in outcomes {
        acc += p;
        if u < acc {
            return x;
        }
    }
    &outcomes.last().expect("nonempty outcome list").0
}
