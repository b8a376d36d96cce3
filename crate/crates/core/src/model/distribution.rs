use std::collections::{BTreeMap, HashMap, HashSet};

use super::partition::{classifier_factors, dedup_states, mask_state, match_partition, partition_option};
use super::precondition::select_precondition_factors;
use super::symbolic::SymbolicTrace;
use super::{ModelConfig, ModelError, SymbolicState};
use crate::bayes::{
    bernoulli_kl, BetaBernoulli, SparseCategorical, SparseDirichletCategorical, SupportPosterior,
};
use crate::rng::RandomSource;
use crate::trace::{OptionId, TraceLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectKind {
    /// A partition of executed start states.
    Partition,
    /// A state where the option was seen available but never executed.
    /// `matched` is the component of the partition it joins with
    /// probability `q_o`.
    Unexecuted { matched: Option<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectComponent {
    pub option: OptionId,
    pub kind: EffectKind,
    pub members: Vec<SymbolicState>,
    pub model: SparseDirichletCategorical,
    pub support: SupportPosterior,
    /// Posterior mean of this component's own model.
    pub own_mean: SparseCategorical,
    /// Effects distribution of the mean model; for unexecuted states the
    /// `q_o` mixture of the matched partition and the own model.
    pub expected: SparseCategorical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreconditionComponent {
    pub option: OptionId,
    /// Symbolic state projected on the option's precondition factors.
    pub key: Vec<u32>,
    pub model: BetaBernoulli,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionModel {
    pub option: OptionId,
    /// Effect component ids of the partitions.
    pub partitions: Vec<usize>,
    /// Effect component ids of the unexecuted available states.
    pub unexecuted: Vec<usize>,
    /// Smallest factor set separating the partitions.
    pub classifier: Vec<usize>,
    /// Factors the precondition depends on.
    pub precondition_factors: Vec<usize>,
    pub preconditions: Vec<usize>,
}

/// One simulated observation, resolved to the component it updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolicObservation {
    Effect { component: usize, outcome: u32 },
    Precondition { component: usize, available: bool },
}

/// Concrete parameters for every component of a model distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledModel {
    pub effects: Vec<SparseCategorical>,
    pub preconditions: Vec<f64>,
    /// For unexecuted components: whether the state joined its matched
    /// partition. `None` for partitions and for the mean model.
    pub assigned: Vec<Option<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEvaluation {
    pub probability: f64,
    /// Some step relied on a prior instead of data.
    pub low_confidence: bool,
}

/// Memoized support-size posteriors; they depend only on the universe
/// size, the number of distinct observed outcomes and the total count.
#[derive(Debug, Clone)]
pub struct SupportCache {
    alpha: f64,
    geom_p: f64,
    table: HashMap<(usize, usize, u64), SupportPosterior>,
}

impl SupportCache {
    pub fn new(alpha: f64, geom_p: f64) -> Self {
        Self {
            alpha,
            geom_p,
            table: HashMap::new(),
        }
    }

    pub fn get(&mut self, universe: usize, k_obs: usize, total: u64) -> &SupportPosterior {
        let (a, p) = (self.alpha, self.geom_p);
        self.table
            .entry((universe, k_obs, total))
            .or_insert_with(|| SupportPosterior::compute(universe, k_obs, total, a, p))
    }

    pub fn mean(&mut self, model: &SparseDirichletCategorical) -> SparseCategorical {
        let post = self.get(model.universe(), model.observed_support(), model.total());
        model.mean_with(post)
    }
}

/// Distribution over symbolic option models built from a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDistribution {
    pub trace: SymbolicTrace,
    pub config: ModelConfig,
    pub options: Vec<OptionModel>,
    pub effects: Vec<EffectComponent>,
    pub preconditions: Vec<PreconditionComponent>,
    dependents: Vec<Vec<usize>>,
    effect_index: HashMap<(OptionId, SymbolicState), usize>,
    precondition_index: HashMap<(OptionId, Vec<u32>), usize>,
    match_index: HashMap<(OptionId, Vec<u32>), usize>,
}

/// Build the model distribution from scratch.
pub fn build_model(log: &TraceLog, num_options: usize, config: &ModelConfig) -> Result<ModelDistribution, ModelError> {
    if log.is_empty() {
        return Err(ModelError::EmptyLog);
    }
    let trace = SymbolicTrace::build(log, config)?;
    ModelDistribution::from_trace(trace, num_options, config)
}

impl ModelDistribution {
    pub fn from_trace(trace: SymbolicTrace, num_options: usize, config: &ModelConfig) -> Result<Self, ModelError> {
        let universe = trace.universe;
        let nf = trace.num_factors();
        let fresh = SparseDirichletCategorical::new(universe, config.alpha, config.geom_p)?;
        let mut cache = SupportCache::new(config.alpha, config.geom_p);
        let mut options = Vec::with_capacity(num_options);
        let mut effects: Vec<EffectComponent> = Vec::new();
        let mut preconditions = Vec::new();
        let mut effect_index = HashMap::new();
        let mut precondition_index = HashMap::new();
        let mut match_index = HashMap::new();

        for o in (0..num_options).map(OptionId) {
            let executed: Vec<(SymbolicState, u32)> = trace
                .transitions
                .iter()
                .filter(|t| t.option == o)
                .map(|t| (t.start.clone(), t.outcome))
                .collect();
            let groups = partition_option(&executed, universe, config.alpha, config.bhc_kappa);
            let mut partition_ids = Vec::with_capacity(groups.len());
            for g in &groups {
                let mut model = fresh.clone();
                for (&id, &n) in &g.counts {
                    model.observe(id, n)?;
                }
                let support = cache.get(universe, model.observed_support(), model.total()).clone();
                let own_mean = model.mean_with(&support);
                let id = effects.len();
                for m in &g.members {
                    effect_index.insert((o, m.clone()), id);
                }
                effects.push(EffectComponent {
                    option: o,
                    kind: EffectKind::Partition,
                    members: g.members.clone(),
                    model,
                    support,
                    expected: own_mean.clone(),
                    own_mean,
                });
                partition_ids.push(id);
            }
            let member_lists: Vec<Vec<SymbolicState>> = groups.iter().map(|g| g.members.clone()).collect();
            let classifier = classifier_factors(&member_lists, nf);
            for (p, members) in member_lists.iter().enumerate() {
                for m in members {
                    let key = (o, mask_state(m, &classifier));
                    let better = match match_index.get(&key).copied() {
                        Some(q) => {
                            let q: usize = q;
                            effects[q].members.len() < members.len()
                        }
                        None => true,
                    };
                    if better {
                        match_index.insert(key, partition_ids[p]);
                    }
                }
            }
            let executed_starts: HashSet<&SymbolicState> = executed.iter().map(|(s, _)| s).collect();
            let unexecuted_states = dedup_states(
                trace
                    .availabilities
                    .iter()
                    .filter(|a| a.available.contains(&o) && !executed_starts.contains(&a.state))
                    .map(|a| &a.state),
            );
            let mut unexecuted = Vec::with_capacity(unexecuted_states.len());
            let prior_support = cache.get(universe, 0, 0).clone();
            let prior_mean = fresh.mean_with(&prior_support);
            for s in unexecuted_states {
                let matched = match_partition(&s, &member_lists, &classifier).map(|p| partition_ids[p]);
                let expected = match matched {
                    Some(m) => effects[m].own_mean.mix(config.q_o, &prior_mean)?,
                    None => prior_mean.clone(),
                };
                let id = effects.len();
                effect_index.insert((o, s.clone()), id);
                effects.push(EffectComponent {
                    option: o,
                    kind: EffectKind::Unexecuted { matched },
                    members: vec![s],
                    model: fresh.clone(),
                    support: prior_support.clone(),
                    own_mean: prior_mean.clone(),
                    expected,
                });
                unexecuted.push(id);
            }

            let availability: Vec<(SymbolicState, bool)> = trace
                .availabilities
                .iter()
                .map(|a| (a.state.clone(), a.available.contains(&o)))
                .collect();
            let fit = select_precondition_factors(&availability, nf, config.precondition_prior);
            let mut pre_ids = Vec::with_capacity(fit.models.len());
            for (key, model) in fit.models {
                let id = preconditions.len();
                precondition_index.insert((o, key.clone()), id);
                preconditions.push(PreconditionComponent { option: o, key, model });
                pre_ids.push(id);
            }
            options.push(OptionModel {
                option: o,
                partitions: partition_ids,
                unexecuted,
                classifier,
                precondition_factors: fit.factors,
                preconditions: pre_ids,
            });
        }
        let mut dependents = vec![Vec::new(); effects.len()];
        for (i, e) in effects.iter().enumerate() {
            if let EffectKind::Unexecuted { matched: Some(m) } = e.kind {
                dependents[m].push(i);
            }
        }
        Ok(Self {
            trace,
            config: config.clone(),
            options,
            effects,
            preconditions,
            dependents,
            effect_index,
            precondition_index,
            match_index,
        })
    }

    pub fn num_options(&self) -> usize {
        self.options.len()
    }

    pub fn universe(&self) -> usize {
        self.trace.universe
    }

    /// Number of distinct observed outcomes; ids below this are known.
    pub fn observed_outcomes(&self) -> usize {
        self.trace.outcomes.len()
    }

    /// Effect component governing `o` from `s`, if `o` was executed or seen
    /// available there.
    pub fn effect_component(&self, o: OptionId, s: &SymbolicState) -> Option<usize> {
        self.effect_index.get(&(o, s.clone())).copied()
    }

    pub fn precondition_component(&self, o: OptionId, s: &SymbolicState) -> Option<usize> {
        let om = self.options.get(o.0)?;
        self.precondition_index
            .get(&(o, mask_state(s, &om.precondition_factors)))
            .copied()
    }

    /// Partition component of `o` whose members share the classifier
    /// projection of `s`; the largest on ties.
    pub fn matched_partition(&self, o: OptionId, s: &SymbolicState) -> Option<usize> {
        let om = self.options.get(o.0)?;
        self.match_index.get(&(o, mask_state(s, &om.classifier))).copied()
    }

    /// Unexecuted components whose matched partition is `c`.
    pub fn dependents(&self, c: usize) -> &[usize] {
        &self.dependents[c]
    }

    /// Unobserved outcome ids in the order sampled supports use them:
    /// globally unseen ids first, then ids seen only elsewhere.
    fn novel_ids(&self, c: usize) -> impl Iterator<Item = u32> + '_ {
        let t = self.observed_outcomes() as u32;
        let n = self.universe() as u32;
        let counts = self.effects[c].model.counts();
        (t..n).chain((0..t).filter(move |id| !counts.contains_key(id)))
    }

    /// Draw the component's own categorical parameters.
    pub fn sample_own_effect(&self, c: usize, rng: &mut RandomSource) -> SparseCategorical {
        let e = &self.effects[c];
        e.model.sample_sparse(&e.support, rng, self.novel_ids(c))
    }

    /// Draw whether an unexecuted state joins its matched partition.
    pub fn sample_assignment(&self, c: usize, rng: &mut RandomSource) -> bool {
        match self.effects[c].kind {
            EffectKind::Unexecuted { matched: Some(_) } => rng.bernoulli(self.config.q_o),
            _ => false,
        }
    }

    pub fn sample(&self, rng: &mut RandomSource) -> SampledModel {
        let mut effects: Vec<SparseCategorical> = Vec::with_capacity(self.effects.len());
        let mut assigned = Vec::with_capacity(self.effects.len());
        for (c, e) in self.effects.iter().enumerate() {
            match e.kind {
                EffectKind::Partition => {
                    effects.push(self.sample_own_effect(c, rng));
                    assigned.push(None);
                }
                EffectKind::Unexecuted { matched } => {
                    let join = self.sample_assignment(c, rng);
                    let params = match matched {
                        Some(m) if join => effects[m].clone(),
                        _ => self.sample_own_effect(c, rng),
                    };
                    effects.push(params);
                    assigned.push(Some(join));
                }
            }
        }
        let preconditions = self.preconditions.iter().map(|p| p.model.sample(rng)).collect();
        SampledModel {
            effects,
            preconditions,
            assigned,
        }
    }

    pub fn mean(&self) -> SampledModel {
        SampledModel {
            effects: self.effects.iter().map(|e| e.expected.clone()).collect(),
            preconditions: self.preconditions.iter().map(|p| p.model.mean()).collect(),
            assigned: vec![None; self.effects.len()],
        }
    }

    /// Mean effects distribution of component `c` after adding the extra
    /// outcome observations returned by `extra` to the effect components.
    pub fn expected_effect_after<'a>(
        &self,
        c: usize,
        extra: impl Fn(usize) -> Option<&'a [u32]>,
        cache: &mut SupportCache,
    ) -> Result<SparseCategorical, ModelError> {
        let own = |i: usize, cache: &mut SupportCache| -> Result<SparseCategorical, ModelError> {
            match extra(i) {
                Some(ids) if !ids.is_empty() => {
                    let mut m = self.effects[i].model.clone();
                    for &id in ids {
                        m.observe(id, 1)?;
                    }
                    Ok(cache.mean(&m))
                }
                _ => Ok(self.effects[i].own_mean.clone()),
            }
        };
        match self.effects[c].kind {
            EffectKind::Partition => own(c, cache),
            EffectKind::Unexecuted { matched: None } => own(c, cache),
            EffectKind::Unexecuted { matched: Some(m) } => {
                let own_c = own(c, cache)?;
                Ok(own(m, cache)?.mix(self.config.q_o, &own_c)?)
            }
        }
    }

    /// Copy of the distribution with conjugate updates for `w`. The
    /// partitioning is left unchanged.
    pub fn posterior_update(&self, w: &[SymbolicObservation]) -> Result<Self, ModelError> {
        let mut next = self.clone();
        if w.is_empty() {
            return Ok(next);
        }
        for obs in w {
            match *obs {
                SymbolicObservation::Effect { component, outcome } => {
                    next.effects
                        .get_mut(component)
                        .ok_or(ModelError::StructureMismatch)?
                        .model
                        .observe(outcome, 1)?;
                }
                SymbolicObservation::Precondition { component, available } => {
                    let p = next
                        .preconditions
                        .get_mut(component)
                        .ok_or(ModelError::StructureMismatch)?;
                    p.model = p.model.update(available);
                }
            }
        }
        let mut cache = SupportCache::new(self.config.alpha, self.config.geom_p);
        for e in next.effects.iter_mut() {
            e.support = cache
                .get(e.model.universe(), e.model.observed_support(), e.model.total())
                .clone();
            e.own_mean = e.model.mean_with(&e.support);
        }
        let q = self.config.q_o;
        for c in 0..next.effects.len() {
            next.effects[c].expected = match next.effects[c].kind {
                EffectKind::Partition | EffectKind::Unexecuted { matched: None } => next.effects[c].own_mean.clone(),
                EffectKind::Unexecuted { matched: Some(m) } => {
                    next.effects[m].own_mean.mix(q, &next.effects[c].own_mean)?
                }
            };
        }
        Ok(next)
    }

    /// Probability that `plan` runs to completion from `start` under `h`,
    /// by exact enumeration of symbolic outcomes. Outcomes never observed
    /// lead to an unknown state whose preconditions take the prior mean.
    pub fn plan_success_probability(
        &self,
        h: &SampledModel,
        start: &SymbolicState,
        plan: &[OptionId],
    ) -> Result<PlanEvaluation, ModelError> {
        check_structure(self, h)?;
        let prior = self.config.precondition_prior.mean();
        let known = self.observed_outcomes() as u32;
        let mut low_confidence = false;
        let mut mass: BTreeMap<Option<SymbolicState>, f64> = BTreeMap::from([(Some(start.clone()), 1.0)]);
        for &o in plan {
            if o.0 >= self.num_options() {
                return Err(ModelError::UnknownOption(o));
            }
            let mut next: BTreeMap<Option<SymbolicState>, f64> = BTreeMap::new();
            for (s, m) in mass {
                let Some(s) = s else {
                    low_confidence = true;
                    *next.entry(None).or_default() += m * prior;
                    continue;
                };
                let pre = match self.precondition_component(o, &s) {
                    Some(c) => h.preconditions[c],
                    None => {
                        low_confidence = true;
                        prior
                    }
                };
                let m = m * pre;
                let Some(c) = self.effect_component(o, &s) else {
                    low_confidence = true;
                    *next.entry(None).or_default() += m;
                    continue;
                };
                let eff = &h.effects[c];
                let mut unknown = eff.rest_each * (eff.universe - eff.listed.len()) as f64;
                for &(id, p) in &eff.listed {
                    if id < known {
                        let s2 = self.trace.outcomes[id as usize].apply(&s);
                        *next.entry(Some(s2)).or_default() += m * p;
                    } else {
                        unknown += p;
                    }
                }
                if unknown > 0.0 {
                    *next.entry(None).or_default() += m * unknown;
                }
            }
            mass = next;
        }
        Ok(PlanEvaluation {
            probability: mass.values().sum(),
            low_confidence,
        })
    }
}

fn check_structure(h_dist: &ModelDistribution, h: &SampledModel) -> Result<(), ModelError> {
    if h.effects.len() != h_dist.effects.len() || h.preconditions.len() != h_dist.preconditions.len() {
        Err(ModelError::StructureMismatch)
    } else {
        Ok(())
    }
}

/// Sum of precondition Bernoulli KLs and effect categorical KLs.
pub fn distance_k(h1: &SampledModel, h2: &SampledModel) -> Result<f64, ModelError> {
    if h1.effects.len() != h2.effects.len() || h1.preconditions.len() != h2.preconditions.len() {
        return Err(ModelError::StructureMismatch);
    }
    let mut k = 0.0;
    for (p, q) in h1.preconditions.iter().zip(&h2.preconditions) {
        k += bernoulli_kl(*p, *q);
    }
    for (p, q) in h1.effects.iter().zip(&h2.effects) {
        k += p.kl(q)?;
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::bernoulli_kl;
    use crate::model::Thresholds;
    use crate::trace::{AvailabilityObservation, StateVector, TransitionObservation};

    fn config() -> ModelConfig {
        ModelConfig {
            mask_thresholds: Thresholds::uniform(1.0),
            epsilon: 1.5,
            ..ModelConfig::default()
        }
    }

    /// Ring of three positions; option 0 steps right, option 1 is only
    /// ever seen available at position 20 and never executed.
    fn ring_log(steps: usize) -> TraceLog {
        let mut log = TraceLog::new();
        let mut x = 0.0;
        for i in 0..steps {
            let mut avail = std::collections::BTreeSet::from([OptionId(0)]);
            if x == 20.0 {
                avail.insert(OptionId(1));
            }
            log.append(AvailabilityObservation {
                state: StateVector(vec![x]),
                available: avail,
            })
            .unwrap();
            let next = (x + 10.0) % 30.0 + (i % 2) as f64 * 0.01;
            log.append(TransitionObservation {
                start: StateVector(vec![x]),
                option: OptionId(0),
                end: StateVector(vec![next]),
            })
            .unwrap();
            x = (next * 100.0).round() / 100.0;
            x -= x % 10.0;
        }
        log
    }

    fn model(steps: usize) -> ModelDistribution {
        build_model(&ring_log(steps), 2, &config()).unwrap()
    }

    #[test]
    fn ring_structure() {
        let h = model(12);
        assert_eq!(h.trace.factors.len(), 1);
        assert_eq!(h.trace.symbolizer.symbol_counts(), vec![3]);
        // three start states with three distinct outcomes stay apart
        assert_eq!(h.options[0].partitions.len(), 3);
        assert_eq!(h.options[0].classifier, vec![0]);
        assert!(h.options[1].partitions.is_empty());
        assert_eq!(h.options[1].unexecuted.len(), 1);
        assert_eq!(h.options[1].precondition_factors, vec![0]);
        assert_eq!(h, model(12));
    }

    #[test]
    fn availability_only_gives_priors() {
        let mut log = TraceLog::new();
        log.append(AvailabilityObservation {
            state: StateVector(vec![1.0, 2.0]),
            available: [OptionId(0)].into(),
        })
        .unwrap();
        let h = build_model(&log, 1, &config()).unwrap();
        assert!(h.options[0].partitions.is_empty());
        let c = h.options[0].unexecuted[0];
        assert_eq!(h.effects[c].model.total(), 0);
        assert_eq!(h.universe(), 1);
        assert!(matches!(build_model(&TraceLog::new(), 1, &config()), Err(ModelError::EmptyLog)));
    }

    #[test]
    fn mean_effects_match_predictive() {
        let h = model(9);
        for e in h.effects.iter().filter(|e| e.kind == EffectKind::Partition) {
            for id in 0..h.universe() as u32 {
                let want = e.model.predictive(id).unwrap();
                assert!((e.expected.prob(id) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sample_average_approaches_mean() {
        let h = model(6);
        let mean = h.mean();
        let mut rng = RandomSource::new(3);
        let n = 10_000;
        let c = h.options[0].partitions[0];
        let mut acc = vec![0.0; h.universe()];
        for _ in 0..n {
            let s = h.sample(&mut rng);
            for (a, p) in acc.iter_mut().zip(s.effects[c].to_dense()) {
                *a += p / n as f64;
            }
        }
        // novel ids are canonical in samples, so compare their mass jointly
        let seen = h.effects[c].model.counts();
        let mut novel = (0.0, 0.0);
        for (id, a) in acc.iter().enumerate() {
            let m = mean.effects[c].prob(id as u32);
            if seen.contains_key(&(id as u32)) {
                assert!((a - m).abs() < 0.01, "{id}");
            } else {
                novel.0 += a;
                novel.1 += m;
            }
        }
        assert!((novel.0 - novel.1).abs() < 0.01, "{novel:?}");
    }

    #[test]
    fn assignment_frequency_follows_q() {
        let mut rng = RandomSource::new(8);
        for (q, want) in [(0.0, 0.0), (1.0, 1.0), (0.3, 0.3)] {
            let cfg = ModelConfig { q_o: q, ..config() };
            // option 1 executed from 20 once, seen available at 50 which
            // matches nothing, and at 20.3 which shares the symbol
            let mut log = ring_log(6);
            log.append(TransitionObservation {
                start: StateVector(vec![20.0]),
                option: OptionId(1),
                end: StateVector(vec![50.0]),
            })
            .unwrap();
            log.append(AvailabilityObservation {
                state: StateVector(vec![0.0]),
                available: [OptionId(0), OptionId(1)].into(),
            })
            .unwrap();
            let h = build_model(&log, 2, &cfg).unwrap();
            let om = &h.options[1];
            assert_eq!(om.classifier, Vec::<usize>::new());
            let u = om.unexecuted[0];
            assert!(matches!(h.effects[u].kind, EffectKind::Unexecuted { matched: Some(_) }));
            let n = 10_000;
            let joined = (0..n).filter(|_| h.sample(&mut rng).assigned[u] == Some(true)).count();
            let f = joined as f64 / n as f64;
            assert!((f - want).abs() < 0.015, "q {q}: {f}");
        }
    }

    #[test]
    fn distance_properties() {
        let h = model(9);
        let mut rng = RandomSource::new(1);
        let a = h.sample(&mut rng);
        let b = h.sample(&mut rng);
        assert_eq!(distance_k(&a, &a).unwrap(), 0.0);
        assert!(distance_k(&a, &b).unwrap() >= 0.0);
        assert!(distance_k(&a, &h.mean()).unwrap() > 0.0);
        let mut short = a.clone();
        short.preconditions.pop();
        assert_eq!(distance_k(&a, &short), Err(ModelError::StructureMismatch));
    }

    #[test]
    fn distance_is_sum_of_terms() {
        let cat = |ps: &[f64]| SparseCategorical {
            universe: ps.len(),
            listed: ps.iter().enumerate().map(|(i, &p)| (i as u32, p)).collect(),
            rest_each: 0.0,
        };
        let h1 = SampledModel {
            effects: vec![cat(&[0.7, 0.3]), cat(&[0.5, 0.5])],
            preconditions: vec![0.9, 0.2],
            assigned: vec![None, None],
        };
        let h2 = SampledModel {
            effects: vec![cat(&[0.4, 0.6]), cat(&[0.1, 0.9])],
            preconditions: vec![0.6, 0.5],
            assigned: vec![None, None],
        };
        let kl2 = |p: [f64; 2], q: [f64; 2]| p[0] * (p[0] / q[0]).ln() + p[1] * (p[1] / q[1]).ln();
        let want = kl2([0.9, 0.1], [0.6, 0.4])
            + kl2([0.2, 0.8], [0.5, 0.5])
            + kl2([0.7, 0.3], [0.4, 0.6])
            + kl2([0.5, 0.5], [0.1, 0.9]);
        assert!((distance_k(&h1, &h2).unwrap() - want).abs() < 1e-9);
        assert!((bernoulli_kl(0.9, 0.6) - kl2([0.9, 0.1], [0.6, 0.4])).abs() < 1e-12);
    }

    #[test]
    fn posterior_update_counts() {
        let h = model(9);
        assert_eq!(h.posterior_update(&[]).unwrap(), h);
        let c = h.options[0].partitions[0];
        let id = *h.effects[c].model.counts().keys().next().unwrap();
        let before = h.effects[c].model.count(id);
        let hw = h
            .posterior_update(&[SymbolicObservation::Effect { component: c, outcome: id }])
            .unwrap();
        assert_eq!(hw.effects[c].model.count(id), before + 1);
        for (i, (a, b)) in h.effects.iter().zip(&hw.effects).enumerate() {
            if i != c {
                assert_eq!(a.model, b.model);
            }
        }
        assert_eq!(h.effects[c].model.count(id), before);
        let mut cache = SupportCache::new(0.5, 0.5);
        let ids = [id];
        let fast = h
            .expected_effect_after(c, |i| (i == c).then_some(&ids[..]), &mut cache)
            .unwrap();
        assert_eq!(fast, hw.effects[c].expected);
    }

    #[test]
    fn observing_a_model_moves_the_mean_toward_it() {
        let h = model(9);
        let mut rng = RandomSource::new(21);
        let mut closer = 0;
        for _ in 0..100 {
            let s = h.sample(&mut rng);
            let mut w = Vec::new();
            for (c, e) in h.effects.iter().enumerate() {
                if e.kind != EffectKind::Partition {
                    continue;
                }
                for _ in 0..30 {
                    let u = rng.uniform();
                    let mut acc = 0.0;
                    let mut pick = s.effects[c].listed.last().unwrap().0;
                    for &(id, p) in &s.effects[c].listed {
                        acc += p;
                        if u < acc {
                            pick = id;
                            break;
                        }
                    }
                    w.push(SymbolicObservation::Effect { component: c, outcome: pick });
                }
            }
            for (c, _) in h.preconditions.iter().enumerate() {
                for _ in 0..30 {
                    let available = rng.bernoulli(s.preconditions[c]);
                    w.push(SymbolicObservation::Precondition { component: c, available });
                }
            }
            let before = distance_k(&s, &h.mean()).unwrap();
            let after = distance_k(&s, &h.posterior_update(&w).unwrap().mean()).unwrap();
            closer += (after <= before) as usize;
        }
        assert!(closer >= 95, "{closer}");
    }

    #[test]
    fn plan_probabilities() {
        let h = model(9);
        let mean = h.mean();
        let s0 = h.trace.transitions[0].start.clone();
        let empty = h.plan_success_probability(&mean, &s0, &[]).unwrap();
        assert_eq!(empty.probability, 1.0);
        let mut hand = mean.clone();
        let c = h.precondition_component(OptionId(0), &s0).unwrap();
        hand.preconditions[c] = 0.8;
        let one = h.plan_success_probability(&hand, &s0, &[OptionId(0)]).unwrap();
        assert!((one.probability - 0.8).abs() < 1e-12);
        assert!(!one.low_confidence);
    }

    #[test]
    fn two_step_plan_matches_enumeration() {
        let h = model(9);
        let mut rng = RandomSource::new(5);
        let hs = h.sample(&mut rng);
        let s0 = h.trace.transitions[0].start.clone();
        let o = OptionId(0);
        // enumerate outcome sequences directly
        let pre = |s: &SymbolicState| h.precondition_component(o, s).map_or(0.5, |c| hs.preconditions[c]);
        let mut want = 0.0;
        let e1 = &hs.effects[h.effect_component(o, &s0).unwrap()];
        let unknown1 = 1.0 - e1.listed.iter().filter(|(id, _)| (*id as usize) < h.observed_outcomes()).map(|(_, p)| p).sum::<f64>();
        want += pre(&s0) * unknown1 * 0.5;
        for &(id, p) in &e1.listed {
            if (id as usize) < h.observed_outcomes() {
                let s1 = h.trace.outcomes[id as usize].apply(&s0);
                want += pre(&s0) * p * pre(&s1);
            }
        }
        let got = h.plan_success_probability(&hs, &s0, &[o, o]).unwrap();
        assert!((got.probability - want).abs() < 1e-9, "{} vs {want}", got.probability);
    }
}
