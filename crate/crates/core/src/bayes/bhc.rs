//! Bayesian hierarchical clustering of count vectors with a
//! Dirichlet-multinomial component model.
//!
//! Each data item is a group with a vector of outcome counts. The merged
//! hypothesis for a cluster is that all of its groups share one categorical
//! distribution. Merge order is greedy on the posterior merge probability
//! `r`; the flat clustering keeps every maximal subtree with `r > 0.5`.

use super::dm::ln_dm_marginal_sparse;
use super::{ln_gamma, log_sum_exp};

#[derive(Debug, Clone, PartialEq)]
pub struct BhcNode {
    /// Group indices under this node, sorted.
    pub members: Vec<usize>,
    /// Merge posterior; `None` for leaves.
    pub r: Option<f64>,
    pub children: Option<(usize, usize)>,
    pub counts: Vec<u32>,
    ln_d: f64,
    ln_p_tree: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BhcTree {
    /// Leaves occupy indices `0..n`, merges follow in creation order.
    pub nodes: Vec<BhcNode>,
    pub root: usize,
}

impl BhcTree {
    /// Flat clusters from cutting below every node with `r <= 0.5`.
    pub fn cut(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            match (node.r, node.children) {
                (Some(r), Some((a, b))) if r <= 0.5 => {
                    stack.push(a);
                    stack.push(b);
                }
                _ => out.push(node.members.clone()),
            }
        }
        out.sort();
        out
    }
}

pub fn bhc_tree(groups: &[Vec<u32>], alpha: f64, kappa: f64) -> BhcTree {
    let k = groups.first().map_or(0, |g| g.len());
    bhc_tree_over(groups, k, alpha, kappa)
}

/// BHC where each count vector lists only some of `categories` outcomes;
/// the unlisted ones have zero count in every group.
pub fn bhc_tree_over(groups: &[Vec<u32>], categories: usize, alpha: f64, kappa: f64) -> BhcTree {
    assert!(!groups.is_empty(), "BHC needs at least one group");
    assert!(groups.iter().all(|g| g.len() <= categories));
    let ln_kappa = kappa.ln();
    let mut nodes: Vec<BhcNode> = groups
        .iter()
        .enumerate()
        .map(|(i, c)| BhcNode {
            members: vec![i],
            r: None,
            children: None,
            counts: c.clone(),
            ln_d: ln_kappa,
            ln_p_tree: ln_dm_marginal_sparse(categories, c.iter().copied(), alpha),
        })
        .collect();
    let mut active: Vec<usize> = (0..groups.len()).collect();
    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize, BhcNode)> = None;
        for x in 0..active.len() {
            for y in x + 1..active.len() {
                let cand = merge(
                    &nodes[active[x]],
                    &nodes[active[y]],
                    (active[x], active[y]),
                    categories,
                    alpha,
                    ln_kappa,
                );
                let r = cand.r.unwrap();
                if best.as_ref().is_none_or(|(br, ..)| r > *br) {
                    best = Some((r, x, y, cand));
                }
            }
        }
        let (_, x, y, node) = best.unwrap();
        nodes.push(node);
        let id = nodes.len() - 1;
        // keep `active` ordered by smallest member so ties resolve lexicographically
        active.remove(y);
        active[x] = id;
        active.sort_by_key(|&i| nodes[i].members[0]);
    }
    BhcTree {
        root: active[0],
        nodes,
    }
}

pub(crate) fn merge(
    a: &BhcNode,
    b: &BhcNode,
    (ia, ib): (usize, usize),
    categories: usize,
    alpha: f64,
    ln_kappa: f64,
) -> BhcNode {
    let at = |c: &[u32], i: usize| c.get(i).copied().unwrap_or(0);
    let counts: Vec<u32> = (0..a.counts.len().max(b.counts.len()))
        .map(|i| at(&a.counts, i) + at(&b.counts, i))
        .collect();
    let mut members: Vec<usize> = a.members.iter().chain(&b.members).copied().collect();
    members.sort_unstable();
    let n = members.len() as f64;
    let ln_prior_merge = ln_kappa + ln_gamma(n);
    let ln_d = log_sum_exp(ln_prior_merge, a.ln_d + b.ln_d);
    let ln_pi = ln_prior_merge - ln_d;
    let ln_one_minus_pi = a.ln_d + b.ln_d - ln_d;
    let ln_h1 = ln_dm_marginal_sparse(categories, counts.iter().copied(), alpha);
    let merged = ln_pi + ln_h1;
    let ln_p_tree = log_sum_exp(merged, ln_one_minus_pi + a.ln_p_tree + b.ln_p_tree);
    BhcNode {
        members,
        r: Some((merged - ln_p_tree).exp()),
        children: Some((ia, ib)),
        counts,
        ln_d,
        ln_p_tree,
    }
}

/// Greedy BHC followed by the `r > 0.5` cut; clusters are sorted lists of
/// group indices.
pub fn bhc_cluster(groups: &[Vec<u32>], alpha: f64, kappa: f64) -> Vec<Vec<usize>> {
    bhc_tree(groups, alpha, kappa).cut()
}

/// [`bhc_cluster`] over a universe of `categories` outcomes.
pub fn bhc_cluster_over(groups: &[Vec<u32>], categories: usize, alpha: f64, kappa: f64) -> Vec<Vec<usize>> {
    bhc_tree_over(groups, categories, alpha, kappa).cut()
}
