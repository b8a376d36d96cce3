use super::ln_gamma;

/// Log evidence of an outcome sequence with the given category counts under
/// a symmetric Dirichlet(`alpha`) prior over `counts.len()` categories.
///
/// This is the sequence probability (no multinomial coefficient), so it
/// equals the product of sequential posterior predictives.
pub fn ln_dm_marginal(counts: &[u32], alpha: f64) -> f64 {
    ln_dm_marginal_sparse(counts.len(), counts.iter().copied(), alpha)
}

/// Same as [`ln_dm_marginal`] for a count vector given by its nonzero
/// entries over a universe of `categories` outcomes.
pub(crate) fn ln_dm_marginal_sparse(
    categories: usize,
    counts: impl IntoIterator<Item = u32>,
    alpha: f64,
) -> f64 {
    let mut total = 0u64;
    let mut acc = 0.0;
    let lg_alpha = ln_gamma(alpha);
    for c in counts {
        if c > 0 {
            total += c as u64;
            acc += ln_gamma(alpha + c as f64) - lg_alpha;
        }
    }
    if total == 0 {
        return 0.0;
    }
    let ka = categories as f64 * alpha;
    acc + ln_gamma(ka) - ln_gamma(ka + total as f64)
}

pub fn dm_marginal_likelihood(counts: &[u32], alpha: f64) -> f64 {
    ln_dm_marginal(counts, alpha).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_zero_counts() {
        assert!((dm_marginal_likelihood(&[2, 0], 0.5) - 0.375).abs() < 1e-14);
    }

    #[test]
    fn empty_counts_have_unit_evidence() {
        assert_eq!(dm_marginal_likelihood(&[0, 0, 0], 0.5), 1.0);
        assert_eq!(dm_marginal_likelihood(&[], 0.5), 1.0);
    }

    #[test]
    fn large_counts_stay_finite() {
        let v = ln_dm_marginal(&[400, 300, 0, 2], 0.5);
        assert!(v.is_finite() && v < 0.0);
    }
}
