use std::collections::{BTreeSet, VecDeque};

use crate::envs::{AbstractState, GroundTruth};
use crate::trace::OptionId;

/// Components that change, with their new values.
pub type Effect = Vec<(usize, u32)>;

pub fn effect_of(start: &AbstractState, end: &AbstractState) -> Effect {
    start
        .iter()
        .zip(end)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, (_, &b))| (i, b))
        .collect()
}

/// Ground-truth effect distribution of an option from a state, with
/// probabilities quantised so equal distributions compare equal.
pub type EffectDistribution = Vec<(Effect, u64)>;

fn effect_distribution<G: GroundTruth + ?Sized>(env: &G, a: &AbstractState, o: OptionId) -> EffectDistribution {
    let mut d: EffectDistribution = env
        .abstract_outcomes(a, o)
        .into_iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(b, p)| (effect_of(a, &b), (p * 1e9).round() as u64))
        .collect();
    d.sort();
    d
}

/// One (partition, outcome) pair of the ground-truth symbolic model. Start
/// states of an option belong to the same partition when their effect
/// distributions are equal, so the distribution itself names the partition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundTransition {
    pub option: OptionId,
    pub partition: EffectDistribution,
    pub effect: Effect,
}

impl GroundTransition {
    /// The pair an observed execution of `o` from `start` to `end` belongs to.
    pub fn of<G: GroundTruth + ?Sized>(env: &G, start: &AbstractState, o: OptionId, end: &AbstractState) -> Self {
        Self {
            option: o,
            partition: effect_distribution(env, start, o),
            effect: effect_of(start, end),
        }
    }
}

/// Every (partition, outcome) pair with positive probability that is
/// reachable from the start state, found by breadth-first search over all
/// stochastic branches.
pub fn oracle_reachable_transitions<G: GroundTruth + ?Sized>(env: &G) -> BTreeSet<GroundTransition> {
    let start = env.abstract_start();
    let mut seen: BTreeSet<AbstractState> = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut out = BTreeSet::new();
    while let Some(a) = queue.pop_front() {
        for o in env.abstract_available(&a) {
            let partition = effect_distribution(env, &a, o);
            for (b, p) in env.abstract_outcomes(&a, o) {
                if p <= 0.0 {
                    continue;
                }
                out.insert(GroundTransition {
                    option: o,
                    partition: partition.clone(),
                    effect: effect_of(&a, &b),
                });
                if seen.insert(b.clone()) {
                    queue.push_back(b);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::asteroids::{move_to, MOVE_CLOCKWISE, MOVE_COUNTERCLOCKWISE};
    use crate::envs::{AsteroidsConfig, AsteroidsWorld, Environment, TreasureConfig, TreasureWorld};
    use crate::rng::RandomSource;

    fn toy() -> AsteroidsWorld {
        AsteroidsWorld::new(AsteroidsConfig::toy()).unwrap()
    }

    #[test]
    fn toy_layout_matches_hand_count() {
        // Faces 0-2 ring asteroid 0 (start face 0), faces 3-5 ring asteroid 1.
        // Each rotation has its own destination: 6 faces x 2 directions,
        // all singleton partitions. Faces 1 and 2 both fly to face 3 or
        // crash back to face 0: one partition, two outcomes. Faces 3 and 5
        // both fly to face 2 and never crash: one partition, one outcome.
        let w = toy();
        assert_eq!(w.start_face(), 0);
        let oracle = oracle_reachable_transitions(&w);
        let count = |o: OptionId| oracle.iter().filter(|t| t.option == o).count();
        assert_eq!(count(MOVE_COUNTERCLOCKWISE), 6);
        assert_eq!(count(MOVE_CLOCKWISE), 6);
        assert_eq!(count(move_to(0)), 1);
        assert_eq!(count(move_to(1)), 2);
        assert_eq!(oracle.len(), 15);
        let up = GroundTransition::of(&w, &vec![1], move_to(1), &vec![0]);
        assert_eq!(up, GroundTransition::of(&w, &vec![2], move_to(1), &vec![0]));
        assert_eq!(up.effect, vec![(0, 0)]);
        assert!(oracle.contains(&up));
    }

    #[test]
    fn oracle_covers_random_play() {
        let mut w = toy();
        let oracle = oracle_reachable_transitions(&w);
        let mut rng = RandomSource::new(4);
        w.reset(&mut rng);
        for _ in 0..2000 {
            let s = w.state().clone();
            let opts: Vec<_> = w.current_options().into_iter().collect();
            let o = *rng.choose(&opts).unwrap();
            let next = w.execute_option(o, &mut rng).unwrap();
            let t = GroundTransition::of(&w, &w.abstract_state(&s), o, &w.abstract_state(&next.state));
            assert!(oracle.contains(&t), "{t:?}");
        }
    }

    #[test]
    fn pinned_totals() {
        let full = oracle_reachable_transitions(&AsteroidsWorld::new(AsteroidsConfig::default()).unwrap());
        let desk = oracle_reachable_transitions(&AsteroidsWorld::new(AsteroidsConfig::desk()).unwrap());
        let treasure = oracle_reachable_transitions(&TreasureWorld::new(TreasureConfig::default()).unwrap());
        assert_eq!(full.len(), 98);
        assert_eq!(desk.len(), 60);
        assert_eq!(treasure.len(), 51);
    }
}
