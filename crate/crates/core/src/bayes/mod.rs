//! Conjugate Bayesian building blocks: Beta-Bernoulli preconditions, sparse
//! Dirichlet-categorical effects, Dirichlet-multinomial evidence, KL
//! divergences and Bayesian hierarchical clustering.

mod beta;
mod bhc;
mod dm;
mod kl;
mod sparse;

pub use beta::BetaBernoulli;
pub use bhc::{bhc_cluster, bhc_cluster_over, bhc_tree, bhc_tree_over, BhcNode, BhcTree};
pub use dm::{dm_marginal_likelihood, ln_dm_marginal};
pub use kl::{bernoulli_kl, categorical_kl};
pub use sparse::{SparseCategorical, SparseDirichletCategorical, SupportPosterior};

use thiserror::Error;

/// Probability floor applied before every KL evaluation.
pub const PROB_CLAMP: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum BayesError {
    #[error("outcome {outcome} outside universe of size {universe}")]
    OutcomeOutOfRange { outcome: u32, universe: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln C(n, k)`
pub(crate) fn ln_choose(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

pub(crate) fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}
