use std::fmt;
use std::str::FromStr;

use super::baselines::{execution_counts, greedy_policy, random_policy};
use super::mcts::mcts_decide;
use super::{ExplorationConfig, ExploreError};
use crate::envs::Environment;
use crate::model::{build_model, ModelConfig, SymbolicTrace};
use crate::rng::RandomSource;
use crate::trace::{AvailabilityObservation, TraceLog, TransitionObservation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    Active,
    Greedy,
    Random,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Active, Policy::Greedy, Policy::Random];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Active => "active",
            Policy::Greedy => "greedy",
            Policy::Random => "random",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown policy {s:?} (expected active, greedy or random)"))
    }
}

/// Reset `env` and execute `config.budget` options chosen by `policy`,
/// logging the availability set before every choice and every transition.
///
/// Environment dynamics and policy choices draw from separate streams of
/// `rng`, so policies compared under one seed face the same world noise
/// sequence.
pub fn explore_run<E: Environment>(
    env: &mut E,
    policy: Policy,
    config: &ExplorationConfig,
    model: &ModelConfig,
    rng: &RandomSource,
) -> Result<TraceLog, ExploreError> {
    config.validate()?;
    let mut env_rng = rng.child(1);
    let mut policy_rng = rng.child(2);
    let mut log = TraceLog::new();
    env.reset(&mut env_rng);
    for i in 0..config.budget {
        let state = env.state().clone();
        let available = env.available_options(&state);
        log.append(AvailabilityObservation {
            state: state.clone(),
            available: available.clone(),
        })
        .expect("environment dimension is fixed");
        let o = match policy {
            Policy::Random => random_policy(&available, &mut policy_rng)?,
            Policy::Greedy => {
                let trace = SymbolicTrace::build(&log, model)?;
                let counts = execution_counts(&trace);
                greedy_policy(&trace.symbolize(&state), &available, &counts, &mut policy_rng)?
            }
            Policy::Active => {
                let dist = build_model(&log, env.num_options(), model)?;
                let current = dist.trace.symbolize(&state);
                mcts_decide(&dist, &current, &available, config.budget - i, config, &mut policy_rng)?
            }
        };
        let step = env.execute_option(o, &mut env_rng)?;
        log.append(TransitionObservation {
            start: state,
            option: o,
            end: step.state,
        })
        .expect("environment dimension is fixed");
    }
    Ok(log)
}
