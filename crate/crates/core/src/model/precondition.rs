use std::collections::BTreeMap;

use super::partition::{mask_state, subsets_by_size};
use super::SymbolicState;
use crate::bayes::BetaBernoulli;

/// Beyond this many factors the subset search becomes greedy forward
/// selection.
const EXHAUSTIVE_LIMIT: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct PreconditionFit {
    pub factors: Vec<usize>,
    pub models: BTreeMap<Vec<u32>, BetaBernoulli>,
    pub ln_evidence: f64,
}

fn fit(observations: &[(SymbolicState, bool)], factors: &[usize], prior: BetaBernoulli) -> PreconditionFit {
    let mut tallies: BTreeMap<Vec<u32>, (u32, u32)> = BTreeMap::new();
    for (s, ok) in observations {
        let e = tallies.entry(mask_state(s, factors)).or_default();
        if *ok {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
    let ln_evidence = tallies.values().map(|&(a, b)| prior.ln_evidence(a, b)).sum();
    let models = tallies
        .into_iter()
        .map(|(k, (a, b))| (k, prior.observe(a, b)))
        .collect();
    PreconditionFit {
        factors: factors.to_vec(),
        models,
        ln_evidence,
    }
}

/// Factor subset maximizing the Beta-Bernoulli evidence of the availability
/// data, with one model per projected state. Ties go to the smaller subset,
/// then the lexicographically smaller one.
pub fn select_precondition_factors(
    observations: &[(SymbolicState, bool)],
    num_factors: usize,
    prior: BetaBernoulli,
) -> PreconditionFit {
    const TIE: f64 = 1e-9;
    if num_factors <= EXHAUSTIVE_LIMIT {
        let mut best: Option<PreconditionFit> = None;
        for fs in subsets_by_size(num_factors) {
            let cand = fit(observations, &fs, prior);
            if best.as_ref().is_none_or(|b| cand.ln_evidence > b.ln_evidence + TIE) {
                best = Some(cand);
            }
        }
        return best.expect("the empty subset is always a candidate");
    }
    let mut best = fit(observations, &[], prior);
    loop {
        let mut improved: Option<PreconditionFit> = None;
        for f in (0..num_factors).filter(|f| !best.factors.contains(f)) {
            let mut fs = best.factors.clone();
            fs.push(f);
            fs.sort_unstable();
            let cand = fit(observations, &fs, prior);
            let bar = improved.as_ref().map_or(best.ln_evidence, |b| b.ln_evidence);
            if cand.ln_evidence > bar + TIE {
                improved = Some(cand);
            }
        }
        match improved {
            Some(c) => best = c,
            None => return best,
        }
    }
}
