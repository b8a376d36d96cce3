use std::collections::BTreeSet;

use super::domain::{Domain, DomainKind};
use super::oracle::GroundTransition;
use crate::envs::{GroundTruth, KeyState, TreasureState};
use crate::trace::TraceLog;

/// Cumulative metrics after `execution` option executions of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub run: usize,
    /// 1-based.
    pub execution: usize,
    /// Oracle transitions not yet observed.
    pub unobserved: usize,
    /// Fraction of decisions taken at each asteroid (Asteroids only).
    pub asteroid_fractions: Vec<f64>,
    /// Fraction of decisions taken without the key while the door is
    /// locked (Treasure only).
    pub no_key_locked: Option<f64>,
    pub keys: Option<u32>,
    pub treasures: Option<u32>,
}

impl MetricsRow {
    /// Metric columns after `run,execution`, matching [`MetricsRow::values`].
    pub fn columns(domain: &Domain) -> Vec<String> {
        let mut cols = vec!["unobserved".to_string()];
        match domain.kind() {
            DomainKind::Asteroids => {
                cols.extend((1..=domain.num_asteroids()).map(|i| format!("asteroid_{i}")));
            }
            DomainKind::Treasure => {
                cols.extend(["no_key_locked", "keys", "treasures"].map(String::from));
            }
        }
        cols
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.unobserved as f64];
        v.extend(&self.asteroid_fractions);
        v.extend(self.no_key_locked);
        v.extend(self.keys.map(f64::from));
        v.extend(self.treasures.map(f64::from));
        v
    }
}

/// One row per execution in `log`, computed on the ground-truth abstraction
/// of each logged state.
pub fn compute_metrics(
    log: &TraceLog,
    domain: &Domain,
    oracle: &BTreeSet<GroundTransition>,
    run: usize,
) -> Vec<MetricsRow> {
    let mut observed: BTreeSet<&GroundTransition> = BTreeSet::new();
    let mut at_asteroid = vec![0usize; domain.num_asteroids()];
    let (mut stuck, mut keys, mut treasures) = (0usize, 0u32, 0u32);
    let mut rows = Vec::with_capacity(log.transitions.len());
    for (k, t) in log.transitions.iter().enumerate() {
        let (start, end) = (domain.abstract_state(&t.start), domain.abstract_state(&t.end));
        let gt = GroundTransition::of(domain, &start, t.option, &end);
        if let Some(known) = oracle.get(&gt) {
            observed.insert(known);
        }
        let n = (k + 1) as f64;
        let mut row = MetricsRow {
            run,
            execution: k + 1,
            unobserved: oracle.len() - observed.len(),
            asteroid_fractions: Vec::new(),
            no_key_locked: None,
            keys: None,
            treasures: None,
        };
        match domain.kind() {
            DomainKind::Asteroids => {
                if let Some(a) = domain.asteroid_of(&start) {
                    at_asteroid[a] += 1;
                }
                row.asteroid_fractions = at_asteroid.iter().map(|&c| c as f64 / n).collect();
            }
            DomainKind::Treasure => {
                let s = TreasureState::from_abstract(&start);
                stuck += (s.key == KeyState::Ledge && s.locked) as usize;
                keys += Domain::key_obtained(&start, &end) as u32;
                treasures += Domain::treasure_obtained(&start, &end) as u32;
                row.no_key_locked = Some(stuck as f64 / n);
                row.keys = Some(keys);
                row.treasures = Some(treasures);
            }
        }
        rows.push(row);
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::asteroids::{MOVE_CLOCKWISE, MOVE_COUNTERCLOCKWISE};
    use crate::envs::treasure::INTERACT;
    use crate::envs::{AsteroidsConfig, AsteroidsWorld, Environment, TreasureConfig, TreasureWorld};
    use crate::harness::oracle_reachable_transitions;
    use crate::rng::RandomSource;
    use crate::trace::{OptionId, TransitionObservation};

    fn play(domain: &mut Domain, opts: impl IntoIterator<Item = OptionId>, seed: u64) -> TraceLog {
        let mut rng = RandomSource::new(seed);
        domain.reset(&mut rng);
        let mut log = TraceLog::new();
        for o in opts {
            let start = domain.state().clone();
            let end = domain.execute_option(o, &mut rng).unwrap().state;
            log.append(TransitionObservation { start, option: o, end }).unwrap();
        }
        log
    }

    #[test]
    fn circling_the_first_asteroid() {
        let mut d: Domain = AsteroidsWorld::new(AsteroidsConfig::desk()).unwrap().into();
        let oracle = oracle_reachable_transitions(&d);
        let log = play(&mut d, [MOVE_CLOCKWISE; 12].into_iter().chain([MOVE_COUNTERCLOCKWISE; 6]), 3);
        let rows = compute_metrics(&log, &d, &oracle, 0);
        assert_eq!(rows.len(), 18);
        for r in &rows {
            assert_eq!(r.asteroid_fractions, vec![1.0, 0.0, 0.0, 0.0]);
        }
        // six faces, both directions
        assert_eq!(rows.last().unwrap().unobserved, oracle.len() - 12);
        assert!(rows.windows(2).all(|w| w[1].unobserved <= w[0].unobserved));
        assert_eq!(MetricsRow::columns(&d).len(), rows[0].values().len());
    }

    #[test]
    fn covering_every_transition_reaches_zero() {
        let d: Domain = AsteroidsWorld::new(AsteroidsConfig::toy()).unwrap().into();
        let oracle = oracle_reachable_transitions(&d);
        let mut log = TraceLog::new();
        let w = match &d {
            Domain::Asteroids(w) => w.clone(),
            Domain::Treasure(_) => unreachable!(),
        };
        let state_at = |f: u32| {
            let mut x = w.clone();
            x.place(f as usize);
            x.state().clone()
        };
        for f in 0..w.num_faces() as u32 {
            for o in w.abstract_available(&vec![f]) {
                for (end, _) in w.abstract_outcomes(&vec![f], o) {
                    log.append(TransitionObservation {
                        start: state_at(f),
                        option: o,
                        end: state_at(end[0]),
                    })
                    .unwrap();
                }
            }
        }
        let rows = compute_metrics(&log, &d, &oracle, 0);
        assert_eq!(rows.last().unwrap().unobserved, 0);
    }

    #[test]
    fn treasure_never_reached() {
        let mut d: Domain = TreasureWorld::new(TreasureConfig::default()).unwrap().into();
        let oracle = oracle_reachable_transitions(&d);
        let mut rng = RandomSource::new(1);
        d.reset(&mut rng);
        let mut log = TraceLog::new();
        // without interacting the door to the treasure stays locked
        for _ in 0..60 {
            let opts: Vec<OptionId> = d.current_options().into_iter().filter(|&o| o != INTERACT).collect();
            let o = *rng.choose(&opts).unwrap();
            let start = d.state().clone();
            let end = d.execute_option(o, &mut rng).unwrap().state;
            log.append(TransitionObservation { start, option: o, end }).unwrap();
        }
        let rows = compute_metrics(&log, &d, &oracle, 0);
        assert_eq!(rows.len(), 60);
        for r in &rows {
            assert_eq!(r.treasures, Some(0));
            assert!(r.no_key_locked.unwrap() <= 1.0);
            assert!(r.asteroid_fractions.is_empty());
        }
    }
}
