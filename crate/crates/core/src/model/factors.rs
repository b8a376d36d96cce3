use std::collections::BTreeSet;

use super::{Mask, ModelError, Thresholds};
use crate::trace::TraceLog;

/// Masks of every transition in order, plus the set of distinct non-empty
/// masks.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedMasks {
    pub per_transition: Vec<Mask>,
    pub distinct: BTreeSet<Mask>,
}

pub fn find_masks(log: &TraceLog, thresholds: &Thresholds) -> Result<ObservedMasks, ModelError> {
    let d = log.dim().unwrap_or(0);
    thresholds.check(d)?;
    let per_transition: Vec<Mask> = log
        .transitions
        .iter()
        .map(|t| {
            Mask(
                (0..d)
                    .filter(|&i| (t.end.0[i] - t.start.0[i]).abs() > thresholds.get(i))
                    .collect(),
            )
        })
        .collect();
    let distinct = per_transition.iter().filter(|m| !m.is_empty()).cloned().collect();
    Ok(ObservedMasks {
        per_transition,
        distinct,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub id: usize,
    pub variables: Vec<usize>,
    /// False for variables that appear in no mask.
    pub changes: bool,
}

/// Variables share a factor iff they appear in exactly the same masks.
/// Variables in no mask each get a factor of their own.
pub fn find_factors(masks: &BTreeSet<Mask>, dim: usize) -> Vec<Factor> {
    let membership: Vec<Vec<usize>> = (0..dim)
        .map(|i| {
            masks
                .iter()
                .enumerate()
                .filter(|(_, m)| m.0.binary_search(&i).is_ok())
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    let mut factors: Vec<Factor> = Vec::new();
    for i in 0..dim {
        let m = &membership[i];
        let existing = if m.is_empty() {
            None
        } else {
            factors
                .iter_mut()
                .find(|f| f.changes && membership[f.variables[0]] == *m)
        };
        match existing {
            Some(f) => f.variables.push(i),
            None => factors.push(Factor {
                id: factors.len(),
                variables: vec![i],
                changes: !m.is_empty(),
            }),
        }
    }
    factors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{OptionId, StateVector, TransitionObservation};

    fn masks(ms: &[&[usize]]) -> BTreeSet<Mask> {
        ms.iter().map(|m| Mask(m.to_vec())).collect()
    }

    fn vars(fs: &[Factor]) -> Vec<Vec<usize>> {
        fs.iter().map(|f| f.variables.clone()).collect()
    }

    #[test]
    fn threshold_separates_noise() {
        let mut log = TraceLog::new();
        for end in [[5.0, 0.0], [0.3, 0.0]] {
            log.append(TransitionObservation {
                start: StateVector(vec![0.0, 0.0]),
                option: OptionId(0),
                end: StateVector(end.to_vec()),
            })
            .unwrap();
        }
        let m = find_masks(&log, &Thresholds::uniform(1.0)).unwrap();
        assert_eq!(m.per_transition, vec![Mask(vec![0]), Mask(vec![])]);
        assert_eq!(m.distinct.len(), 1);
    }

    #[test]
    fn shared_masks_share_factor() {
        let f = find_factors(&masks(&[&[0, 1], &[2]]), 3);
        assert_eq!(vars(&f), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn overlapping_masks_split_all() {
        let f = find_factors(&masks(&[&[0, 1], &[1, 2]]), 3);
        assert_eq!(vars(&f), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn unchanged_variables_are_singletons() {
        let f = find_factors(&masks(&[&[1, 3]]), 4);
        assert_eq!(vars(&f), vec![vec![0], vec![1, 3], vec![2]]);
        assert!(!f[0].changes && f[1].changes && !f[2].changes);
    }
}
