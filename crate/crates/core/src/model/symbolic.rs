use std::collections::{BTreeSet, HashMap};

use super::factors::{find_factors, find_masks, ObservedMasks};
use super::symbols::Symbolizer;
use super::{Factor, ModelConfig, ModelError, SymbolicState};
use crate::trace::{OptionId, StateVector, TraceLog};

/// Effect of one transition: the factors in its mask and their new symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    pub factors: Vec<usize>,
    pub values: Vec<u32>,
}

impl Outcome {
    pub fn apply(&self, s: &SymbolicState) -> SymbolicState {
        let mut next = s.clone();
        for (&f, &v) in self.factors.iter().zip(&self.values) {
            next.0[f] = v;
        }
        next
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicTransition {
    pub start: SymbolicState,
    pub option: OptionId,
    pub end: SymbolicState,
    /// Index into [`SymbolicTrace::outcomes`].
    pub outcome: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicAvailability {
    pub state: SymbolicState,
    pub available: BTreeSet<OptionId>,
}

/// Steps 1 to 5 of model building: masks, factors, symbols and the
/// symbolized observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicTrace {
    pub masks: ObservedMasks,
    pub factors: Vec<Factor>,
    pub symbolizer: Symbolizer,
    /// Distinct observed outcomes in order of first appearance.
    pub outcomes: Vec<Outcome>,
    /// Size of the effects outcome universe: the empty outcome plus every
    /// symbol assignment of every observed non-empty mask.
    pub universe: usize,
    pub transitions: Vec<SymbolicTransition>,
    pub availabilities: Vec<SymbolicAvailability>,
}

impl SymbolicTrace {
    pub fn build(log: &TraceLog, config: &ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let dim = log.dim().unwrap_or(0);
        let masks = find_masks(log, &config.mask_thresholds)?;
        let factors = find_factors(&masks.distinct, dim);
        let states: Vec<&StateVector> = log
            .transitions
            .iter()
            .flat_map(|t| [&t.start, &t.end])
            .chain(log.availabilities.iter().map(|a| &a.state))
            .collect();
        let symbolizer = Symbolizer::fit(&factors, &states, config.epsilon, config.min_samples);

        let mut factor_of = vec![0; dim];
        for f in &factors {
            for &v in &f.variables {
                factor_of[v] = f.id;
            }
        }
        let mask_factors = |m: &super::Mask| -> Vec<usize> {
            let mut fs: Vec<usize> = m.0.iter().map(|&v| factor_of[v]).collect();
            fs.dedup();
            fs.sort_unstable();
            fs.dedup();
            fs
        };
        let counts = symbolizer.symbol_counts();
        let mut universe: usize = 1;
        for m in &masks.distinct {
            let size = mask_factors(m)
                .iter()
                .fold(1usize, |acc, &f| acc.saturating_mul(counts[f].max(1)));
            universe = universe.saturating_add(size);
        }
        let universe = universe.min(u32::MAX as usize);

        let mut outcomes = Vec::new();
        let mut outcome_ids: HashMap<Outcome, u32> = HashMap::new();
        let mut transitions = Vec::with_capacity(log.transitions.len());
        for (t, m) in log.transitions.iter().zip(&masks.per_transition) {
            let start = symbolizer.symbolize(&t.start);
            let end = symbolizer.symbolize(&t.end);
            let fs = mask_factors(m);
            let outcome = Outcome {
                values: fs.iter().map(|&f| end.0[f]).collect(),
                factors: fs,
            };
            let id = *outcome_ids.entry(outcome.clone()).or_insert_with(|| {
                outcomes.push(outcome);
                (outcomes.len() - 1) as u32
            });
            transitions.push(SymbolicTransition {
                start,
                option: t.option,
                end,
                outcome: id,
            });
        }
        let availabilities = log
            .availabilities
            .iter()
            .map(|a| SymbolicAvailability {
                state: symbolizer.symbolize(&a.state),
                available: a.available.clone(),
            })
            .collect();
        Ok(Self {
            masks,
            factors,
            symbolizer,
            outcomes,
            universe,
            transitions,
            availabilities,
        })
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn symbolize(&self, s: &StateVector) -> SymbolicState {
        self.symbolizer.symbolize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Thresholds;
    use crate::trace::{AvailabilityObservation, TransitionObservation};

    fn config() -> ModelConfig {
        ModelConfig {
            mask_thresholds: Thresholds::uniform(1.0),
            epsilon: 1.5,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn empty_mask_keeps_symbolic_state() {
        let mut log = TraceLog::new();
        log.append(TransitionObservation {
            start: StateVector(vec![0.0, 0.0]),
            option: OptionId(0),
            end: StateVector(vec![10.0, 0.0]),
        })
        .unwrap();
        log.append(TransitionObservation {
            start: StateVector(vec![10.0, 0.0]),
            option: OptionId(1),
            end: StateVector(vec![10.2, 0.1]),
        })
        .unwrap();
        log.append(AvailabilityObservation {
            state: StateVector(vec![10.2, 0.1]),
            available: [OptionId(0)].into(),
        })
        .unwrap();
        let st = SymbolicTrace::build(&log, &config()).unwrap();
        assert_eq!(st.factors.len(), 2);
        let t = &st.transitions[1];
        assert_eq!(t.start, t.end);
        assert_eq!(st.outcomes[t.outcome as usize].factors, Vec::<usize>::new());
        // empty outcome plus two symbols of the moving factor
        assert_eq!(st.universe, 3);
        assert_eq!(st.outcomes[0].apply(&st.transitions[0].start), st.transitions[0].end);
    }
}
