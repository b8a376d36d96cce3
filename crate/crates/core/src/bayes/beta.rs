use crate::rng::RandomSource;
use rand_distr::{Beta, Distribution};

use super::{ln_beta, BayesError, PROB_CLAMP};

/// Beta posterior over a Bernoulli parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBernoulli {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BetaBernoulli {
    fn default() -> Self {
        Self::uniform()
    }
}

impl BetaBernoulli {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, BayesError> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(BayesError::InvalidParameter(format!(
                "Beta({alpha}, {beta}) needs positive finite parameters"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn uniform() -> Self {
        Self { alpha: 1.0, beta: 1.0 }
    }

    #[must_use]
    pub fn update(self, success: bool) -> Self {
        self.observe(success as u32, (!success) as u32)
    }

    #[must_use]
    pub fn observe(self, successes: u32, failures: u32) -> Self {
        Self {
            alpha: self.alpha + successes as f64,
            beta: self.beta + failures as f64,
        }
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Draw a Bernoulli parameter, clamped to `[δ, 1-δ]`.
    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        let d = Beta::new(self.alpha, self.beta).expect("parameters validated on construction");
        d.sample(rng).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
    }

    /// Log marginal likelihood of an outcome sequence with the given counts
    /// under this distribution as prior.
    pub fn ln_evidence(&self, successes: u32, failures: u32) -> f64 {
        ln_beta(self.alpha + successes as f64, self.beta + failures as f64)
            - ln_beta(self.alpha, self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn conjugate_updates() {
        let b = BetaBernoulli::uniform();
        assert!(close(b.mean(), 0.5, 1e-15));
        assert!(close(b.update(true).mean(), 2.0 / 3.0, 1e-15));
        let b4 = b.update(true).update(true).update(true).update(false);
        assert_eq!(b4, BetaBernoulli { alpha: 4.0, beta: 2.0 });
        assert!(close(b4.mean(), 2.0 / 3.0, 1e-15));
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(BetaBernoulli::new(0.0, 1.0).is_err());
        assert!(BetaBernoulli::new(1.0, -2.0).is_err());
    }

    #[test]
    fn sample_mean_matches() {
        let b = BetaBernoulli::new(4.0, 2.0).unwrap();
        let mut rng = RandomSource::new(11);
        let n = 100_000;
        let m: f64 = (0..n).map(|_| b.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(close(m, 2.0 / 3.0, 0.01), "{m}");
    }

    #[test]
    fn samples_stay_open() {
        let b = BetaBernoulli::new(0.05, 0.05).unwrap();
        let mut rng = RandomSource::new(5);
        for _ in 0..1_000_000 {
            let x = b.sample(&mut rng);
            assert!(x > 0.0 && x < 1.0);
        }
    }

    #[test]
    fn evidence_is_sequence_probability() {
        // Beta(1,1): P(s, s, f) = 1/2 * 2/3 * 1/4
        let b = BetaBernoulli::uniform();
        assert!(close(b.ln_evidence(2, 1).exp(), 0.5 * (2.0 / 3.0) * 0.25, 1e-14));
        assert_eq!(b.ln_evidence(0, 0), 0.0);
    }
}
