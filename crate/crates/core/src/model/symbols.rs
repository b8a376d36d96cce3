use std::collections::{HashMap, VecDeque};

use super::{Factor, SymbolicState};
use crate::trace::StateVector;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// DBSCAN labels; `None` marks noise. A point is a core point when at least
/// `min_samples` points (itself included) lie within distance `eps`.
/// Clusters are numbered in order of their first core point.
pub fn dbscan(points: &[Vec<f64>], eps: f64, min_samples: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let e2 = eps * eps;
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| dist2(&points[i], &points[j]) <= e2).collect())
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_samples.max(1)).collect();
    let mut labels = vec![None; n];
    let mut next = 0;
    for seed in 0..n {
        if labels[seed].is_some() || !core[seed] {
            continue;
        }
        labels[seed] = Some(next);
        let mut queue = VecDeque::from([seed]);
        while let Some(p) = queue.pop_front() {
            for &q in &neighbours[p] {
                if labels[q].is_none() {
                    labels[q] = Some(next);
                    if core[q] {
                        queue.push_back(q);
                    }
                }
            }
        }
        next += 1;
    }
    labels
}

/// Cluster labels for every point; noise points become singleton symbols.
pub fn find_symbols(points: &[Vec<f64>], eps: f64, min_samples: usize) -> Vec<u32> {
    let labels = dbscan(points, eps, min_samples);
    let mut next = labels.iter().flatten().max().map_or(0, |m| m + 1);
    labels
        .into_iter()
        .map(|l| {
            l.unwrap_or_else(|| {
                next += 1;
                next - 1
            }) as u32
        })
        .collect()
}

fn key(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

/// Symbols of one factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    pub variables: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub eps: f64,
    known: HashMap<Vec<u64>, u32>,
}

impl SymbolTable {
    /// Cluster the distinct projections in `points` (first-seen order).
    pub fn fit(variables: Vec<usize>, points: &[Vec<f64>], eps: f64, min_samples: usize, single: bool) -> Self {
        let labels: Vec<u32> = if single {
            vec![0; points.len()]
        } else {
            find_symbols(points, eps, min_samples)
        };
        let count = labels.iter().max().map_or(0, |m| m + 1) as usize;
        let dim = variables.len();
        let mut sums = vec![vec![0.0; dim]; count];
        let mut sizes = vec![0usize; count];
        let mut known = HashMap::new();
        for (p, &l) in points.iter().zip(&labels) {
            for (s, v) in sums[l as usize].iter_mut().zip(p) {
                *s += v;
            }
            sizes[l as usize] += 1;
            known.insert(key(p), l);
        }
        let centroids = sums
            .into_iter()
            .zip(sizes)
            .map(|(s, n)| s.into_iter().map(|v| v / n as f64).collect())
            .collect();
        Self {
            variables,
            centroids,
            eps,
            known,
        }
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn project(&self, s: &StateVector) -> Vec<f64> {
        self.variables.iter().map(|&i| s.0[i]).collect()
    }

    /// Symbol of a state. Clustered points keep their label; other points go
    /// to the nearest centroid within `eps`, or to the fresh id `len()`.
    pub fn symbol(&self, s: &StateVector) -> u32 {
        let p = self.project(s);
        if let Some(&l) = self.known.get(&key(&p)) {
            return l;
        }
        let e2 = self.eps * self.eps;
        self.centroids
            .iter()
            .enumerate()
            .map(|(i, c)| (i, dist2(c, &p)))
            .filter(|&(_, d)| d <= e2)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map_or(self.centroids.len() as u32, |(i, _)| i as u32)
    }
}

/// Maps continuous states to symbolic states.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbolizer {
    pub tables: Vec<SymbolTable>,
}

impl Symbolizer {
    /// Fit one symbol table per factor on the distinct observed states.
    pub fn fit(factors: &[Factor], states: &[&StateVector], eps: f64, min_samples: usize) -> Self {
        let tables = factors
            .iter()
            .map(|f| {
                let mut seen = std::collections::HashSet::new();
                let points: Vec<Vec<f64>> = states
                    .iter()
                    .map(|s| f.variables.iter().map(|&i| s.0[i]).collect::<Vec<f64>>())
                    .filter(|p| seen.insert(key(p)))
                    .collect();
                SymbolTable::fit(f.variables.clone(), &points, eps, min_samples, !f.changes)
            })
            .collect();
        Self { tables }
    }

    pub fn symbolize(&self, s: &StateVector) -> SymbolicState {
        SymbolicState(self.tables.iter().map(|t| t.symbol(s)).collect())
    }

    pub fn symbol_counts(&self) -> Vec<usize> {
        self.tables.iter().map(|t| t.len()).collect()
    }
}
