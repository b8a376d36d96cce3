use super::{BayesError, PROB_CLAMP};

/// KL(Bern(p) || Bern(q)) with both parameters clamped to `[δ, 1-δ]`.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    let q = q.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if p == q {
        return 0.0;
    }
    let v = p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    v.max(0.0)
}

/// KL(p || q) between categoricals. Entries are floored at δ and each
/// vector renormalized before evaluation.
pub fn categorical_kl(p: &[f64], q: &[f64]) -> Result<f64, BayesError> {
    if p.len() != q.len() {
        return Err(BayesError::LengthMismatch(p.len(), q.len()));
    }
    let zp: f64 = p.iter().map(|&x| x.max(PROB_CLAMP)).sum();
    let zq: f64 = q.iter().map(|&x| x.max(PROB_CLAMP)).sum();
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let a = a.max(PROB_CLAMP) / zp;
        let b = b.max(PROB_CLAMP) / zq;
        if a != b {
            acc += a * (a / b).ln();
        }
    }
    Ok(acc.max(0.0))
}
