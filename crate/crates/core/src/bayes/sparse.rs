//! Sparse Dirichlet-categorical model over a finite outcome universe.
//!
//! The prior first draws a support size `k` from a geometric distribution
//! truncated to `[1, N]`, then a support set uniformly among the `C(N, k)`
//! subsets of that size, then symmetric Dirichlet(`alpha`) weights on the
//! support. Because supports of equal size are exchangeable, the posterior
//! only needs the distribution over `k`; no subset enumeration is required.

use std::collections::BTreeMap;

use rand_distr::{Distribution, Gamma};

use super::{ln_choose, ln_gamma, BayesError, PROB_CLAMP};
use crate::rng::RandomSource;

/// Log-weights this far below the mode are dropped from the support sum.
const LOG_WEIGHT_CUTOFF: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseDirichletCategorical {
    alpha: f64,
    geom_p: f64,
    universe: usize,
    counts: BTreeMap<u32, u32>,
    total: u64,
}

/// Posterior over the support size.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPosterior {
    /// Smallest support size with nonzero mass.
    pub k_min: usize,
    /// Normalized probabilities of `k_min, k_min + 1, ...`.
    pub probs: Vec<f64>,
}

impl SupportPosterior {
    /// Posterior over the support size given `k_obs` distinct observed
    /// outcomes and `total` observations; it depends on nothing else.
    pub fn compute(universe: usize, k_obs: usize, total: u64, alpha: f64, geom_p: f64) -> Self {
        let n = total as f64;
        let ln_q = (1.0 - geom_p).ln();
        let k_min = k_obs.max(1);
        let mut log_w = Vec::new();
        let mut best = f64::NEG_INFINITY;
        let mut falling = 0;
        for k in k_min..=universe {
            let lw = (k - 1) as f64 * ln_q + ln_choose(universe - k_obs, k - k_obs)
                - ln_choose(universe, k)
                + ln_gamma(k as f64 * alpha)
                - ln_gamma(k as f64 * alpha + n);
            if let Some(&prev) = log_w.last() {
                falling = if lw < prev { falling + 1 } else { 0 };
            }
            best = best.max(lw);
            log_w.push(lw);
            if falling >= 8 && lw < best - LOG_WEIGHT_CUTOFF {
                break;
            }
        }
        let z: f64 = log_w.iter().map(|lw| (lw - best).exp()).sum();
        let probs = log_w.iter().map(|lw| (lw - best).exp() / z).collect();
        Self { k_min, probs }
    }

    pub fn sample(&self, rng: &mut RandomSource) -> usize {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return self.k_min + i;
            }
        }
        self.k_min + self.probs.len() - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.k_min + i, p))
    }
}

impl SparseDirichletCategorical {
    pub fn new(universe: usize, alpha: f64, geom_p: f64) -> Result<Self, BayesError> {
        if universe == 0 {
            return Err(BayesError::InvalidParameter("empty outcome universe".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(BayesError::InvalidParameter(format!("alpha = {alpha}")));
        }
        if !(geom_p > 0.0 && geom_p < 1.0) {
            return Err(BayesError::InvalidParameter(format!(
                "geometric parameter {geom_p} not in (0, 1)"
            )));
        }
        Ok(Self {
            alpha,
            geom_p,
            universe,
            counts: BTreeMap::new(),
            total: 0,
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn geom_p(&self) -> f64 {
        self.geom_p
    }

    pub fn counts(&self) -> &BTreeMap<u32, u32> {
        &self.counts
    }

    pub fn count(&self, outcome: u32) -> u32 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn observed_support(&self) -> usize {
        self.counts.len()
    }

    pub fn update(mut self, outcome: u32) -> Result<Self, BayesError> {
        self.observe(outcome, 1)?;
        Ok(self)
    }

    pub fn observe(&mut self, outcome: u32, n: u32) -> Result<(), BayesError> {
        if outcome as usize >= self.universe {
            return Err(BayesError::OutcomeOutOfRange {
                outcome,
                universe: self.universe,
            });
        }
        if n > 0 {
            *self.counts.entry(outcome).or_insert(0) += n;
            self.total += n as u64;
        }
        Ok(())
    }

    pub fn support_posterior(&self) -> SupportPosterior {
        SupportPosterior::compute(
            self.universe,
            self.counts.len(),
            self.total,
            self.alpha,
            self.geom_p,
        )
    }

    pub fn predictive(&self, outcome: u32) -> Result<f64, BayesError> {
        if outcome as usize >= self.universe {
            return Err(BayesError::OutcomeOutOfRange {
                outcome,
                universe: self.universe,
            });
        }
        Ok(self.mean().prob(outcome))
    }

    /// Posterior mean (equivalently the posterior predictive) in compact form.
    pub fn mean(&self) -> SparseCategorical {
        self.mean_with(&self.support_posterior())
    }

    pub fn mean_with(&self, post: &SupportPosterior) -> SparseCategorical {
        let n = self.total as f64;
        let a = self.alpha;
        let k_obs = self.counts.len();
        let n_unobs = self.universe - k_obs;
        // E[1/(n + k a)] and E[(k - k_obs)/(n + k a)] under the posterior
        let mut inv = 0.0;
        let mut novel = 0.0;
        for (k, p) in post.iter() {
            let d = n + k as f64 * a;
            inv += p / d;
            novel += p * (k - k_obs) as f64 / d;
        }
        let listed = self
            .counts
            .iter()
            .map(|(&id, &c)| (id, (c as f64 + a) * inv))
            .collect();
        let rest_each = if n_unobs == 0 {
            0.0
        } else {
            a * novel / n_unobs as f64
        };
        SparseCategorical {
            universe: self.universe,
            listed,
            rest_each,
        }
    }

    /// Draw a categorical parameter vector in compact form. Unobserved
    /// outcomes that enter the support take their ids from `novel_ids`,
    /// which must yield distinct ids with zero count.
    pub fn sample_sparse(
        &self,
        post: &SupportPosterior,
        rng: &mut RandomSource,
        novel_ids: impl IntoIterator<Item = u32>,
    ) -> SparseCategorical {
        let k = post.sample(rng);
        let extra = k - self.counts.len();
        let mut listed: Vec<(u32, f64)> = Vec::with_capacity(k);
        for (&id, &c) in &self.counts {
            listed.push((id, gamma_draw(self.alpha + c as f64, rng)));
        }
        for id in novel_ids.into_iter().take(extra) {
            debug_assert!(!self.counts.contains_key(&id));
            listed.push((id, gamma_draw(self.alpha, rng)));
        }
        let s: f64 = listed.iter().map(|(_, w)| w).sum();
        if s > 0.0 {
            for (_, w) in listed.iter_mut() {
                *w /= s;
            }
        } else {
            let u = 1.0 / listed.len() as f64;
            for (_, w) in listed.iter_mut() {
                *w = u;
            }
        }
        listed.sort_by_key(|(id, _)| *id);
        SparseCategorical {
            universe: self.universe,
            listed,
            rest_each: 0.0,
        }
    }

    /// Draw a dense parameter vector over the whole universe; the novel part
    /// of the support is chosen uniformly among unobserved outcomes.
    pub fn sample(&self, rng: &mut RandomSource) -> Vec<f64> {
        let post = self.support_posterior();
        let mut pool: Vec<u32> = (0..self.universe as u32)
            .filter(|id| !self.counts.contains_key(id))
            .collect();
        // partial Fisher-Yates: enough for the largest possible support
        let take = pool.len();
        for i in 0..take {
            let j = i + rng.index(pool.len() - i);
            pool.swap(i, j);
        }
        self.sample_sparse(&post, rng, pool).to_dense()
    }
}

fn gamma_draw(shape: f64, rng: &mut RandomSource) -> f64 {
    Gamma::new(shape, 1.0)
        .expect("positive shape")
        .sample(rng)
}

/// Categorical distribution over a universe of `universe` outcomes, stored
/// as explicit entries plus one shared probability for every other outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCategorical {
    pub universe: usize,
    /// `(outcome, probability)` sorted by outcome.
    pub listed: Vec<(u32, f64)>,
    /// Probability of each outcome not in `listed`.
    pub rest_each: f64,
}

impl SparseCategorical {
    pub fn point_mass(universe: usize, outcome: u32) -> Self {
        Self {
            universe,
            listed: vec![(outcome, 1.0)],
            rest_each: 0.0,
        }
    }

    pub fn prob(&self, outcome: u32) -> f64 {
        match self.listed.binary_search_by_key(&outcome, |(id, _)| *id) {
            Ok(i) => self.listed[i].1,
            Err(_) => self.rest_each,
        }
    }

    pub fn total(&self) -> f64 {
        self.listed.iter().map(|(_, p)| p).sum::<f64>()
            + self.rest_each * (self.universe - self.listed.len()) as f64
    }

    /// Draw one outcome id.
    pub fn draw(&self, rng: &mut RandomSource) -> u32 {
        let u = rng.uniform() * self.total();
        let mut acc = 0.0;
        for &(id, p) in &self.listed {
            acc += p;
            if u < acc {
                return id;
            }
        }
        let rest = self.universe - self.listed.len();
        if self.rest_each > 0.0 && rest > 0 {
            // j-th outcome not in `listed`
            let mut j = (((u - acc) / self.rest_each) as usize).min(rest - 1) as u32;
            for &(id, _) in &self.listed {
                if id <= j {
                    j += 1;
                } else {
                    break;
                }
            }
            return j;
        }
        self.listed.iter().rev().find(|(_, p)| *p > 0.0).map_or(0, |(id, _)| *id)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![self.rest_each; self.universe];
        for &(id, p) in &self.listed {
            v[id as usize] = p;
        }
        v
    }

    /// `w * self + (1 - w) * other`
    pub fn mix(&self, w: f64, other: &SparseCategorical) -> Result<SparseCategorical, BayesError> {
        if self.universe != other.universe {
            return Err(BayesError::LengthMismatch(self.universe, other.universe));
        }
        let listed = merge_keys(&self.listed, &other.listed)
            .map(|(id, a, b)| {
                let a = a.unwrap_or(self.rest_each);
                let b = b.unwrap_or(other.rest_each);
                (id, w * a + (1.0 - w) * b)
            })
            .collect();
        Ok(SparseCategorical {
            universe: self.universe,
            listed,
            rest_each: w * self.rest_each + (1.0 - w) * other.rest_each,
        })
    }

    /// KL(self || other) with the same δ-floor-and-renormalize rule as
    /// [`super::categorical_kl`] applied to the dense expansions.
    pub fn kl(&self, other: &SparseCategorical) -> Result<f64, BayesError> {
        if self.universe != other.universe {
            return Err(BayesError::LengthMismatch(self.universe, other.universe));
        }
        let mut union = 0usize;
        let mut zp = 0.0;
        let mut zq = 0.0;
        for (_, a, b) in merge_keys(&self.listed, &other.listed) {
            union += 1;
            zp += a.unwrap_or(self.rest_each).max(PROB_CLAMP);
            zq += b.unwrap_or(other.rest_each).max(PROB_CLAMP);
        }
        let rest = (self.universe - union) as f64;
        let rp = self.rest_each.max(PROB_CLAMP);
        let rq = other.rest_each.max(PROB_CLAMP);
        zp += rest * rp;
        zq += rest * rq;
        let mut acc = 0.0;
        for (_, a, b) in merge_keys(&self.listed, &other.listed) {
            let a = a.unwrap_or(self.rest_each).max(PROB_CLAMP) / zp;
            let b = b.unwrap_or(other.rest_each).max(PROB_CLAMP) / zq;
            if a != b {
                acc += a * (a / b).ln();
            }
        }
        if rest > 0.0 {
            let a = rp / zp;
            let b = rq / zq;
            if a != b {
                acc += rest * a * (a / b).ln();
            }
        }
        Ok(acc.max(0.0))
    }
}

/// Sorted merge of two keyed lists.
fn merge_keys<'a>(
    a: &'a [(u32, f64)],
    b: &'a [(u32, f64)],
) -> impl Iterator<Item = (u32, Option<f64>, Option<f64>)> + 'a {
    let mut i = 0;
    let mut j = 0;
    std::iter::from_fn(move || match (a.get(i), b.get(j)) {
        (Some(&(ka, va)), Some(&(kb, vb))) => {
            if ka == kb {
                i += 1;
                j += 1;
                Some((ka, Some(va), Some(vb)))
            } else if ka < kb {
                i += 1;
                Some((ka, Some(va), None))
            } else {
                j += 1;
                Some((kb, None, Some(vb)))
            }
        }
        (Some(&(ka, va)), None) => {
            i += 1;
            Some((ka, Some(va), None))
        }
        (None, Some(&(kb, vb))) => {
            j += 1;
            Some((kb, None, Some(vb)))
        }
        (None, None) => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draw_frequencies_match_dense() {
        let c = SparseCategorical {
            universe: 6,
            listed: vec![(1, 0.3), (4, 0.5)],
            rest_each: 0.05,
        };
        let mut rng = RandomSource::new(17);
        let n = 40_000;
        let mut hits = [0usize; 6];
        for _ in 0..n {
            hits[c.draw(&mut rng) as usize] += 1;
        }
        for (id, p) in c.to_dense().into_iter().enumerate() {
            let f = hits[id] as f64 / n as f64;
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((f - p).abs() <= 4.0 * sd + 1e-12, "{id}: {f} vs {p}");
        }
        assert_eq!(SparseCategorical::point_mass(3, 2).draw(&mut rng), 2);
    }
    use crate::bayes::{categorical_kl, ln_dm_marginal};

    fn model(n: usize, counts: &[(u32, u32)]) -> SparseDirichletCategorical {
        let mut m = SparseDirichletCategorical::new(n, 0.5, 0.5).unwrap();
        for &(id, c) in counts {
            m.observe(id, c).unwrap();
        }
        m
    }

    /// Posterior predictive by explicit enumeration of every nonempty
    /// support set, weighted by prior and Dirichlet-multinomial likelihood.
    fn brute_force_predictive(n: usize, counts: &[(u32, u32)], alpha: f64, p: f64) -> Vec<f64> {
        let mut dense = vec![0u32; n];
        for &(id, c) in counts {
            dense[id as usize] += c;
        }
        let total: u32 = dense.iter().sum();
        let z_geom: f64 = (1..=n).map(|k| p * (1.0 - p).powi(k as i32 - 1)).sum();
        let mut pred = vec![0.0; n];
        let mut z = 0.0;
        for mask in 1u32..(1 << n) {
            if (0..n).any(|i| dense[i] > 0 && mask & (1 << i) == 0) {
                continue;
            }
            let k = mask.count_ones() as usize;
            let n_sets = (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64);
            let prior = p * (1.0 - p).powi(k as i32 - 1) / z_geom / n_sets;
            let sub: Vec<u32> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| dense[i]).collect();
            let w = prior * ln_dm_marginal(&sub, alpha).exp();
            z += w;
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    pred[i] += w * (dense[i] as f64 + alpha) / (total as f64 + k as f64 * alpha);
                }
            }
        }
        pred.iter().map(|x| x / z).collect()
    }

    #[test]
    fn uninformed_binary_is_uniform() {
        let m = model(2, &[]);
        assert!((m.predictive(0).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.predictive(1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn update_and_range() {
        let m = model(5, &[]).update(3).unwrap();
        assert_eq!(m.counts().iter().collect::<Vec<_>>(), vec![(&3, &1)]);
        let m = m.update(3).unwrap();
        assert_eq!(m.count(3), 2);
        assert_eq!(m.observed_support(), 1);
        assert_eq!(
            m.update(5).unwrap_err(),
            BayesError::OutcomeOutOfRange { outcome: 5, universe: 5 }
        );
    }

    #[test]
    fn matches_brute_force_small() {
        let counts = [(0u32, 2u32)];
        let bf = brute_force_predictive(3, &counts, 0.5, 0.5);
        let m = model(3, &counts);
        for (i, want) in bf.iter().enumerate() {
            let got = m.predictive(i as u32).unwrap();
            assert!((got - want).abs() < 1e-12, "{i}: {got} vs {want}");
        }
    }

    #[test]
    fn predictive_normalized_and_exchangeable() {
        let mut rng = RandomSource::new(8);
        for _ in 0..200 {
            let n = 1 + rng.index(40);
            let mut m = model(n, &[]);
            for _ in 0..rng.index(30) {
                let id = rng.index(n.min(4)) as u32;
                m.observe(id, 1 + rng.index(3) as u32).unwrap();
            }
            let dense = m.mean().to_dense();
            let s: f64 = dense.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "sum {s}");
            let unobs: Vec<f64> = (0..n as u32)
                .filter(|i| m.count(*i) == 0)
                .map(|i| dense[i as usize])
                .collect();
            assert!(unobs.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn full_support_sample_covers_everything() {
        let m = model(3, &[(0, 1), (1, 4), (2, 2)]);
        let mut rng = RandomSource::new(2);
        for _ in 0..100 {
            let v = m.sample(&mut rng);
            assert!(v.iter().all(|&x| x > 0.0));
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_matches_predictive() {
        let m = model(6, &[(1, 3), (4, 1)]);
        let mean = m.mean().to_dense();
        let mut rng = RandomSource::new(77);
        let n = 100_000;
        let mut acc = vec![0.0; 6];
        for _ in 0..n {
            for (a, x) in acc.iter_mut().zip(m.sample(&mut rng)) {
                *a += x;
            }
        }
        for (a, want) in acc.iter().zip(&mean) {
            assert!((a / n as f64 - want).abs() < 0.01, "{} vs {want}", a / n as f64);
        }
    }

    #[test]
    fn compact_kl_equals_dense_kl() {
        let mut rng = RandomSource::new(31);
        for _ in 0..300 {
            let n = 2 + rng.index(12);
            let mut m = model(n, &[]);
            for _ in 0..rng.index(6) {
                m.observe(rng.index(n) as u32, 1).unwrap();
            }
            let post = m.support_posterior();
            let unobs: Vec<u32> = (0..n as u32).filter(|i| m.count(*i) == 0).collect();
            let h = m.sample_sparse(&post, &mut rng, unobs.clone());
            let mean = m.mean_with(&post);
            let other = mean.mix(0.3, &SparseCategorical::point_mass(n, unobs.first().copied().unwrap_or(0))).unwrap();
            for (p, q) in [(&h, &mean), (&mean, &h), (&h, &other), (&other, &mean)] {
                let compact = p.kl(q).unwrap();
                let dense = categorical_kl(&p.to_dense(), &q.to_dense()).unwrap();
                assert!((compact - dense).abs() < 1e-9 * (1.0 + dense), "{compact} vs {dense}");
            }
        }
    }

    #[test]
    fn large_universe_is_cheap_and_normalized() {
        let m = model(5000, &[(10, 40), (11, 2)]);
        let post = m.support_posterior();
        assert!(post.probs.len() < 200);
        assert!((m.mean().total() - 1.0).abs() < 1e-12);
    }
}
