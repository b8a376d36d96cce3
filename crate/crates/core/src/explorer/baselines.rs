use std::collections::{BTreeSet, HashMap};

use super::ExploreError;
use crate::model::{SymbolicState, SymbolicTrace};
use crate::rng::RandomSource;
use crate::trace::OptionId;

pub fn random_policy(available: &BTreeSet<OptionId>, rng: &mut RandomSource) -> Result<OptionId, ExploreError> {
    let opts: Vec<OptionId> = available.iter().copied().collect();
    rng.choose(&opts).copied().ok_or(ExploreError::NoAvailableOptions)
}

/// Executions of each option from each symbolic start state.
pub fn execution_counts(trace: &SymbolicTrace) -> HashMap<(SymbolicState, OptionId), u32> {
    let mut counts = HashMap::new();
    for t in &trace.transitions {
        *counts.entry((t.start.clone(), t.option)).or_insert(0) += 1;
    }
    counts
}

/// Available option least executed from `state`; ties uniform.
pub fn greedy_policy(
    state: &SymbolicState,
    available: &BTreeSet<OptionId>,
    counts: &HashMap<(SymbolicState, OptionId), u32>,
    rng: &mut RandomSource,
) -> Result<OptionId, ExploreError> {
    let count = |o: OptionId| counts.get(&(state.clone(), o)).copied().unwrap_or(0);
    let least = available
        .iter()
        .map(|&o| count(o))
        .min()
        .ok_or(ExploreError::NoAvailableOptions)?;
    let ties: Vec<OptionId> = available.iter().copied().filter(|&o| count(o) == least).collect();
    Ok(*rng.choose(&ties).expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[usize]) -> BTreeSet<OptionId> {
        ids.iter().map(|&i| OptionId(i)).collect()
    }

    #[test]
    fn random_singleton_and_empty() {
        let mut rng = RandomSource::new(0);
        assert_eq!(random_policy(&set(&[3]), &mut rng).unwrap(), OptionId(3));
        assert!(matches!(
            random_policy(&set(&[]), &mut rng),
            Err(ExploreError::NoAvailableOptions)
        ));
    }

    #[test]
    fn random_is_uniform() {
        let mut rng = RandomSource::new(1);
        let n = 10_000;
        let ones = (0..n)
            .filter(|_| random_policy(&set(&[0, 1]), &mut rng).unwrap() == OptionId(1))
            .count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn greedy_takes_least_executed() {
        let s = SymbolicState(vec![1, 2]);
        let other = SymbolicState(vec![0, 0]);
        let counts = HashMap::from([
            ((s.clone(), OptionId(1)), 2),
            ((other.clone(), OptionId(2)), 5),
            ((other, OptionId(1)), 0),
        ]);
        let mut rng = RandomSource::new(2);
        for _ in 0..20 {
            // counts elsewhere do not matter
            assert_eq!(greedy_policy(&s, &set(&[1, 2]), &counts, &mut rng).unwrap(), OptionId(2));
        }
        assert!(greedy_policy(&s, &set(&[]), &counts, &mut rng).is_err());
    }

    #[test]
    fn greedy_ties_are_uniform() {
        let s = SymbolicState(vec![0]);
        let counts = HashMap::from([((s.clone(), OptionId(0)), 1), ((s.clone(), OptionId(2)), 1)]);
        let mut rng = RandomSource::new(3);
        let mut hits = [0usize; 3];
        for _ in 0..9000 {
            hits[greedy_policy(&s, &set(&[0, 1, 2]), &counts, &mut rng).unwrap().0] += 1;
        }
        assert_eq!(hits[1], 9000);
        let counts = HashMap::new();
        let mut hits = [0usize; 3];
        for _ in 0..9000 {
            hits[greedy_policy(&s, &set(&[0, 1, 2]), &counts, &mut rng).unwrap().0] += 1;
        }
        assert!(hits.iter().all(|&h| (h as f64 / 9000.0 - 1.0 / 3.0).abs() < 0.02));
    }
}
