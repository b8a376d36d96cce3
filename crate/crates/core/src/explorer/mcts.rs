use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{ExplorationConfig, ExploreError, ScoreNormalization};
use crate::bayes::{bernoulli_kl, SparseCategorical};
use crate::model::{EffectKind, ModelDistribution, ModelError, SupportCache, SymbolicObservation, SymbolicState};
use crate::rng::RandomSource;
use crate::trace::OptionId;

/// A model `h ~ H` whose parameters are drawn on first use.
///
/// Components are independent under `H`, so drawing only the ones a
/// simulation touches gives the same joint law as drawing all of them.
#[derive(Debug)]
pub struct LazyModel<'a> {
    dist: &'a ModelDistribution,
    effects: Vec<Option<SparseCategorical>>,
    assigned: Vec<Option<bool>>,
    preconditions: Vec<Option<f64>>,
    unseen: HashMap<(OptionId, SymbolicState), bool>,
}

impl<'a> LazyModel<'a> {
    pub fn new(dist: &'a ModelDistribution) -> Self {
        Self {
            dist,
            effects: vec![None; dist.effects.len()],
            assigned: vec![None; dist.effects.len()],
            preconditions: vec![None; dist.preconditions.len()],
            unseen: HashMap::new(),
        }
    }

    pub fn distribution(&self) -> &'a ModelDistribution {
        self.dist
    }

    /// Whether unexecuted component `c` shares its matched partition's
    /// parameters in this model; always false for partitions.
    pub fn assigned(&mut self, c: usize, rng: &mut RandomSource) -> bool {
        if let Some(a) = self.assigned[c] {
            return a;
        }
        let a = self.dist.sample_assignment(c, rng);
        self.assigned[c] = Some(a);
        a
    }

    /// Whether a state never seen with `o` shares the parameters of the
    /// partition its classifier projection matches; drawn with the same
    /// probability as for unexecuted states.
    pub fn joins_unseen(&mut self, o: OptionId, s: &SymbolicState, rng: &mut RandomSource) -> bool {
        let q = self.dist.config.q_o;
        *self.unseen.entry((o, s.clone())).or_insert_with(|| rng.bernoulli(q))
    }

    pub fn effect(&mut self, c: usize, rng: &mut RandomSource) -> &SparseCategorical {
        if self.effects[c].is_none() {
            let params = match self.dist.effects[c].kind {
                EffectKind::Unexecuted { matched: Some(m) } if self.assigned(c, rng) => self.effect(m, rng).clone(),
                _ => self.dist.sample_own_effect(c, rng),
            };
            self.effects[c] = Some(params);
        }
        self.effects[c].as_ref().expect("just drawn")
    }

    pub fn precondition(&mut self, c: usize, rng: &mut RandomSource) -> f64 {
        *self.preconditions[c].get_or_insert_with(|| self.dist.preconditions[c].model.sample(rng))
    }
}

/// Result of one simulated option execution.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// Next symbolic state, or `None` when the execution reached an
    /// unobserved transition.
    pub next: Option<SymbolicState>,
    /// Effect observation for `w`; absent when the state has no effect
    /// component for the option.
    pub observation: Option<SymbolicObservation>,
}

/// Simulate executing `o` from `s` under the lazily sampled model `h`.
pub fn simulate_step(h: &mut LazyModel<'_>, s: &SymbolicState, o: OptionId, rng: &mut RandomSource) -> StepResult {
    let dist = h.distribution();
    let Some(c) = dist.effect_component(o, s) else {
        // a state absent from the trace: generalise from the matched
        // partition or count as novel; nothing is added to w
        let next = dist
            .matched_partition(o, s)
            .filter(|_| h.joins_unseen(o, s, rng))
            .and_then(|m| {
                let id = h.effect(m, rng).draw(rng);
                (dist.effects[m].model.count(id) > 0).then(|| dist.trace.outcomes[id as usize].apply(s))
            });
        return StepResult { next, observation: None };
    };
    // the component whose observed counts decide novelty
    let source = match dist.effects[c].kind {
        EffectKind::Partition => Some(c),
        EffectKind::Unexecuted { matched: Some(m) } if h.assigned(c, rng) => Some(m),
        EffectKind::Unexecuted { .. } => None,
    };
    let id = h.effect(c, rng).draw(rng);
    let observation = Some(SymbolicObservation::Effect { component: c, outcome: id });
    let seen = source.is_some_and(|m| dist.effects[m].model.count(id) > 0);
    let next = seen.then(|| dist.trace.outcomes[id as usize].apply(s));
    StepResult { next, observation }
}

/// Observations and termination of one simulation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulatedTrajectory {
    pub observations: Vec<SymbolicObservation>,
    /// Number of simulated executions.
    pub depth: usize,
    /// Depth used in the score: the firing depth for novel trajectories,
    /// the remaining budget otherwise.
    pub g: usize,
    pub novel: bool,
}

/// `K(h, E[H]) - K(h, E[H(w)]) - z g`.
///
/// Only components touched by `w` (and unexecuted states mixed with a
/// touched partition) differ between the two means, so the difference is
/// summed over those alone.
pub fn score_trajectory(
    h: &mut LazyModel<'_>,
    traj: &SimulatedTrajectory,
    z: f64,
    cache: &mut SupportCache,
    rng: &mut RandomSource,
) -> Result<f64, ModelError> {
    let dist = h.distribution();
    let mut effect_extra: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    let mut pre_extra: BTreeMap<usize, (u32, u32)> = BTreeMap::new();
    for obs in &traj.observations {
        match *obs {
            SymbolicObservation::Effect { component, outcome } => {
                effect_extra.entry(component).or_default().push(outcome)
            }
            SymbolicObservation::Precondition { component, available } => {
                let e = pre_extra.entry(component).or_default();
                if available {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
    }
    let mut touched: BTreeSet<usize> = effect_extra.keys().copied().collect();
    for &c in effect_extra.keys() {
        touched.extend(dist.dependents(c));
    }
    let mut gain = 0.0;
    for c in touched {
        let before = &dist.effects[c].expected;
        let after = dist.expected_effect_after(c, |i| effect_extra.get(&i).map(Vec::as_slice), cache)?;
        let hc = h.effect(c, rng);
        gain += hc.kl(before)? - hc.kl(&after)?;
    }
    for (c, (yes, no)) in pre_extra {
        let model = dist.preconditions[c].model;
        let p = h.precondition(c, rng);
        gain += bernoulli_kl(p, model.mean()) - bernoulli_kl(p, model.observe(yes, no).mean());
    }
    Ok(gain - z * traj.g as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChildStats {
    pub option: OptionId,
    pub visits: u64,
    pub total: f64,
    /// Tree nodes for the symbolic states reached through this option.
    pub next: HashMap<SymbolicState, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub state: SymbolicState,
    pub parent: Option<usize>,
    /// Simulations that passed through this node.
    pub visits: u64,
    /// Sum of the scores of those simulations.
    pub total: f64,
    /// One entry per option, indexed by option id.
    pub children: Vec<ChildStats>,
}

impl SearchNode {
    pub fn new(state: SymbolicState, parent: Option<usize>, num_options: usize) -> Self {
        Self {
            state,
            parent,
            visits: 0,
            total: 0.0,
            children: (0..num_options)
                .map(|o| ChildStats {
                    option: OptionId(o),
                    visits: 0,
                    total: 0.0,
                    next: HashMap::new(),
                })
                .collect(),
        }
    }
}

/// Lowest and highest scores seen so far in one search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRange {
    pub min: f64,
    pub max: f64,
}

impl Default for ScoreRange {
    fn default() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl ScoreRange {
    pub fn observe(&mut self, x: f64) {
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    /// Map `x` into `[0, 1]`; 0.5 while the range is degenerate.
    pub fn normalize(&self, x: f64) -> f64 {
        if self.max > self.min {
            ((x - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }
}

/// Range of the mean scores of the visited `available` children.
pub fn sibling_range(node: &SearchNode, available: &[OptionId]) -> ScoreRange {
    let mut r = ScoreRange::default();
    for o in available {
        let ch = &node.children[o.0];
        if ch.visits > 0 {
            r.observe(ch.total / ch.visits as f64);
        }
    }
    r
}

/// UCT choice among `available` children of `node`. Unvisited children
/// come first; ties are broken uniformly at random.
pub fn uct_select(
    node: &SearchNode,
    available: &[OptionId],
    c: f64,
    range: &ScoreRange,
    rng: &mut RandomSource,
) -> OptionId {
    assert!(!available.is_empty(), "uct_select needs an available option");
    let unvisited: Vec<OptionId> = available
        .iter()
        .copied()
        .filter(|o| node.children[o.0].visits == 0)
        .collect();
    if let Some(&o) = rng.choose(&unvisited) {
        return o;
    }
    let ln_n = (node.visits.max(1) as f64).ln();
    let value = |o: OptionId| {
        let ch = &node.children[o.0];
        let n = ch.visits as f64;
        range.normalize(ch.total / n) + c * (ln_n / n).sqrt()
    };
    let best = available.iter().map(|&o| value(o)).fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<OptionId> = available.iter().copied().filter(|&o| value(o) == best).collect();
    *rng.choose(&ties).expect("at least one maximiser")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchTree {
    /// Node 0 is the root.
    pub nodes: Vec<SearchNode>,
    pub range: ScoreRange,
    /// Depth and score of every simulation, in order.
    pub simulations: Vec<(SimulatedTrajectory, f64)>,
}

impl SearchTree {
    pub fn root(&self) -> &SearchNode {
        &self.nodes[0]
    }

    /// Most visited root child; ties uniform.
    pub fn best_root_option(&self, rng: &mut RandomSource) -> OptionId {
        let root = self.root();
        let most = root.children.iter().map(|c| c.visits).max().unwrap_or(0);
        let ties: Vec<OptionId> = root
            .children
            .iter()
            .filter(|c| c.visits == most)
            .map(|c| c.option)
            .collect();
        *rng.choose(&ties).expect("root has children")
    }
}

/// Draw simulated availability of every option at `s`, recording one
/// precondition observation per option with a known component.
fn draw_available(
    h: &mut LazyModel<'_>,
    s: &SymbolicState,
    obs: &mut Vec<SymbolicObservation>,
    rng: &mut RandomSource,
) -> Vec<OptionId> {
    let dist = h.distribution();
    let prior = dist.config.precondition_prior.mean();
    let mut out = Vec::new();
    for o in 0..dist.num_options() {
        let o = OptionId(o);
        let available = match dist.precondition_component(o, s) {
            Some(c) => {
                let p = h.precondition(c, rng);
                let a = rng.bernoulli(p);
                obs.push(SymbolicObservation::Precondition { component: c, available: a });
                a
            }
            None => rng.bernoulli(prior),
        };
        if available {
            out.push(o);
        }
    }
    out
}

/// Run `config.mcts_updates` simulations from `current`, where the real
/// environment offers `available`, with `budget` executions remaining.
pub fn mcts_search(
    dist: &ModelDistribution,
    current: &SymbolicState,
    available: &BTreeSet<OptionId>,
    budget: usize,
    config: &ExplorationConfig,
    rng: &mut RandomSource,
) -> Result<SearchTree, ExploreError> {
    config.validate()?;
    if budget == 0 {
        return Err(ExploreError::InvalidConfig("no executions remaining".into()));
    }
    if available.is_empty() {
        return Err(ExploreError::NoAvailableOptions);
    }
    if let Some(o) = available.iter().find(|o| o.0 >= dist.num_options()) {
        return Err(ModelError::UnknownOption(*o).into());
    }
    let root_available: Vec<OptionId> = available.iter().copied().collect();
    let n_opts = dist.num_options();
    let mut tree = SearchTree {
        nodes: vec![SearchNode::new(current.clone(), None, n_opts)],
        range: ScoreRange::default(),
        simulations: Vec::with_capacity(config.mcts_updates),
    };
    let mut cache = SupportCache::new(dist.config.alpha, dist.config.geom_p);
    for _ in 0..config.mcts_updates {
        let mut h = LazyModel::new(dist);
        let mut traj = SimulatedTrajectory::default();
        // tree nodes visited, with the option chosen at each (if any)
        let mut path: Vec<(usize, Option<OptionId>)> = Vec::new();
        let mut node = Some(0usize);
        let mut state = current.clone();
        loop {
            if traj.depth >= budget {
                break;
            }
            let options = if traj.depth == 0 {
                root_available.clone()
            } else {
                draw_available(&mut h, &state, &mut traj.observations, rng)
            };
            if options.is_empty() {
                if let Some(n) = node {
                    path.push((n, None));
                }
                break;
            }
            let o = match node {
                Some(n) => {
                    let range = match config.normalization {
                        ScoreNormalization::Search => tree.range,
                        ScoreNormalization::Siblings => sibling_range(&tree.nodes[n], &options),
                    };
                    uct_select(&tree.nodes[n], &options, config.uct_c, &range, rng)
                }
                None => *rng.choose(&options).expect("nonempty"),
            };
            if let Some(n) = node {
                path.push((n, Some(o)));
            }
            let step = simulate_step(&mut h, &state, o, rng);
            traj.depth += 1;
            traj.observations.extend(step.observation);
            let Some(next) = step.next else {
                traj.novel = true;
                break;
            };
            node = match node {
                Some(n) => match tree.nodes[n].children[o.0].next.get(&next) {
                    Some(&child) => Some(child),
                    None => {
                        // expand once, then roll out from the new node
                        tree.nodes.push(SearchNode::new(next.clone(), Some(n), n_opts));
                        let id = tree.nodes.len() - 1;
                        tree.nodes[n].children[o.0].next.insert(next.clone(), id);
                        path.push((id, None));
                        None
                    }
                },
                None => None,
            };
            state = next;
        }
        traj.g = if traj.novel { traj.depth } else { budget };
        let score = score_trajectory(&mut h, &traj, config.z, &mut cache, rng)?;
        tree.range.observe(score);
        for &(n, o) in &path {
            let nd = &mut tree.nodes[n];
            nd.visits += 1;
            nd.total += score;
            if let Some(o) = o {
                nd.children[o.0].visits += 1;
                nd.children[o.0].total += score;
            }
        }
        tree.simulations.push((traj, score));
    }
    Ok(tree)
}

/// Option to execute next: the most visited root child after the search.
pub fn mcts_decide(
    dist: &ModelDistribution,
    current: &SymbolicState,
    available: &BTreeSet<OptionId>,
    budget: usize,
    config: &ExplorationConfig,
    rng: &mut RandomSource,
) -> Result<OptionId, ExploreError> {
    let tree = mcts_search(dist, current, available, budget, config, rng)?;
    Ok(tree.best_root_option(rng))
}
