use std::collections::{BTreeMap, HashSet};

use super::SymbolicState;
use crate::bayes::bhc_cluster_over;

/// Executed start states of one option grouped into abstract-subgoal
/// partitions, each with merged outcome counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionGroup {
    pub members: Vec<SymbolicState>,
    pub counts: BTreeMap<u32, u32>,
}

/// Cluster the start states of one option by their outcome counts.
/// `observations` holds `(start, outcome)` pairs; outcome ids index a
/// universe of `universe` outcomes.
pub fn partition_option(
    observations: &[(SymbolicState, u32)],
    universe: usize,
    alpha: f64,
    kappa: f64,
) -> Vec<PartitionGroup> {
    let mut by_start: BTreeMap<&SymbolicState, BTreeMap<u32, u32>> = BTreeMap::new();
    for (s, o) in observations {
        *by_start.entry(s).or_default().entry(*o).or_default() += 1;
    }
    if by_start.is_empty() {
        return Vec::new();
    }
    let local: Vec<u32> = by_start
        .values()
        .flat_map(|c| c.keys().copied())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let starts: Vec<(&SymbolicState, BTreeMap<u32, u32>)> = by_start.into_iter().collect();
    let groups: Vec<Vec<u32>> = starts
        .iter()
        .map(|(_, c)| local.iter().map(|id| c.get(id).copied().unwrap_or(0)).collect())
        .collect();
    bhc_cluster_over(&groups, universe.max(local.len()), alpha, kappa)
        .into_iter()
        .map(|cluster| {
            let mut counts = BTreeMap::new();
            let mut members = Vec::with_capacity(cluster.len());
            for g in cluster {
                members.push(starts[g].0.clone());
                for (&id, &n) in &starts[g].1 {
                    *counts.entry(id).or_insert(0) += n;
                }
            }
            PartitionGroup { members, counts }
        })
        .collect()
}

pub fn mask_state(s: &SymbolicState, factors: &[usize]) -> Vec<u32> {
    factors.iter().map(|&f| s.0[f]).collect()
}

fn separates(partitions: &[Vec<SymbolicState>], factors: &[usize]) -> bool {
    let mut owner = std::collections::HashMap::new();
    for (p, members) in partitions.iter().enumerate() {
        for s in members {
            if *owner.entry(mask_state(s, factors)).or_insert(p) != p {
                return false;
            }
        }
    }
    true
}

/// Factor subsets of `num_factors` factors by size, then lexicographically.
pub(crate) fn subsets_by_size(num_factors: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..=num_factors).flat_map(move |k| Combinations::new(num_factors, k))
}

struct Combinations {
    n: usize,
    idx: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.idx.clone()?;
        let k = cur.len();
        let mut next = cur.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.idx = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.idx = Some(next);
                break;
            }
        }
        Some(cur)
    }
}

/// Smallest factor subset whose projection keeps the partitions disjoint;
/// ties go to the lexicographically smallest subset.
pub fn classifier_factors(partitions: &[Vec<SymbolicState>], num_factors: usize) -> Vec<usize> {
    subsets_by_size(num_factors)
        .find(|fs| separates(partitions, fs))
        .unwrap_or_else(|| (0..num_factors).collect())
}

/// Partition whose members, projected on `classifier`, include the
/// projection of `s`. Several matches resolve to the largest partition,
/// then the lowest index.
pub fn match_partition(s: &SymbolicState, partitions: &[Vec<SymbolicState>], classifier: &[usize]) -> Option<usize> {
    let target = mask_state(s, classifier);
    let mut best: Option<(usize, usize)> = None;
    for (p, members) in partitions.iter().enumerate() {
        let hit = members.iter().any(|m| mask_state(m, classifier) == target);
        if hit && best.is_none_or(|(_, n)| members.len() > n) {
            best = Some((p, members.len()));
        }
    }
    best.map(|(p, _)| p)
}

/// Distinct states in first-seen order.
pub(crate) fn dedup_states<'a>(states: impl Iterator<Item = &'a SymbolicState>) -> Vec<SymbolicState> {
    let mut seen = HashSet::new();
    states.filter(|s| seen.insert(*s)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(v: &[u32]) -> SymbolicState {
        SymbolicState(v.to_vec())
    }

    #[test]
    fn identical_effects_merge() {
        let obs: Vec<(SymbolicState, u32)> = (0..4).flat_map(|_| [(st(&[0]), 7), (st(&[1]), 7)]).collect();
        let p = partition_option(&obs, 10, 0.5, 1.0);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].members, vec![st(&[0]), st(&[1])]);
        assert_eq!(p[0].counts[&7], 8);
    }

    #[test]
    fn distinct_effects_split() {
        let obs: Vec<(SymbolicState, u32)> = (0..4).flat_map(|_| [(st(&[0]), 1), (st(&[1]), 2)]).collect();
        assert_eq!(partition_option(&obs, 10, 0.5, 1.0).len(), 2);
    }

    #[test]
    fn single_start_single_partition() {
        let obs = vec![(st(&[3, 1]), 0), (st(&[3, 1]), 1)];
        assert_eq!(partition_option(&obs, 4, 0.5, 1.0).len(), 1);
    }

    #[test]
    fn combinations_are_ordered() {
        let all: Vec<Vec<usize>> = subsets_by_size(3).collect();
        assert_eq!(
            all,
            vec![
                vec![],
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
    }

    #[test]
    fn classifier_examples() {
        assert_eq!(classifier_factors(&[vec![st(&[0, 0, 0]), st(&[1, 1, 0])]], 3), Vec::<usize>::new());
        let parts = vec![vec![st(&[0, 0, 0]), st(&[1, 1, 0])], vec![st(&[0, 1, 1])]];
        assert_eq!(classifier_factors(&parts, 3), vec![2]);
    }

    #[test]
    fn matching_prefers_larger_partition() {
        let parts = vec![vec![st(&[0, 5])], vec![st(&[1, 5]), st(&[2, 5])]];
        assert_eq!(match_partition(&st(&[9, 5]), &parts, &[1]), Some(1));
        assert_eq!(match_partition(&st(&[9, 4]), &parts, &[1]), None);
        assert_eq!(match_partition(&st(&[0, 4]), &parts, &[0]), Some(0));
    }
}
