use std::collections::BTreeSet;

use skillsym::envs::treasure::INTERACT;
use skillsym::envs::{AsteroidsConfig, AsteroidsWorld, Environment, TreasureConfig, TreasureWorld};
use skillsym::explorer::{explore_run, ExplorationConfig, Policy};
use skillsym::harness::{DomainKind, ExperimentConfig};
use skillsym::model::{find_masks, Mask, SymbolicTrace};
use skillsym::rng::RandomSource;
use skillsym::trace::TraceLog;

fn random_play<E: Environment>(env: &mut E, domain: DomainKind, steps: usize, seed: u64) -> TraceLog {
    let config = ExplorationConfig {
        budget: steps,
        ..ExplorationConfig::default()
    };
    let model = ExperimentConfig::defaults(domain).model;
    explore_run(env, Policy::Random, &config, &model, &RandomSource::new(seed)).unwrap()
}

#[test]
fn asteroids_has_one_factor() {
    let mut env = AsteroidsWorld::new(AsteroidsConfig::default()).unwrap();
    let log = random_play(&mut env, DomainKind::Asteroids, 500, 3);
    let trace = SymbolicTrace::build(&log, &ExperimentConfig::defaults(DomainKind::Asteroids).model).unwrap();
    assert_eq!(trace.num_factors(), 1);
    assert!(trace.symbolizer.symbol_counts()[0] <= 35);
    assert!(trace.transitions.iter().all(|t| t.start.0.len() == 1));
}

#[test]
fn asteroids_symbols_are_faces() {
    let mut env = AsteroidsWorld::new(AsteroidsConfig::default()).unwrap();
    let log = random_play(&mut env, DomainKind::Asteroids, 4000, 5);
    let faces: BTreeSet<usize> = log.transitions.iter().map(|t| env.face_of(&t.start)).collect();
    assert_eq!(faces.len(), 35, "random play should visit every face");
    let trace = SymbolicTrace::build(&log, &ExperimentConfig::defaults(DomainKind::Asteroids).model).unwrap();
    assert_eq!(trace.symbolizer.symbol_counts(), vec![35]);
}

#[test]
fn treasure_factors_and_handle_mask() {
    let mut env = TreasureWorld::new(TreasureConfig::default()).unwrap();
    let log = random_play(&mut env, DomainKind::Treasure, 3000, 1);
    let decoded: Vec<_> = log.transitions.iter().map(|t| env.decode(&t.end)).collect();
    assert!(decoded.iter().any(|d| d.treasure_held), "random play should reach the treasure");
    assert!(decoded.iter().any(|d| !d.locked));

    let model = ExperimentConfig::defaults(DomainKind::Treasure).model;
    let trace = SymbolicTrace::build(&log, &model).unwrap();
    // agent x, agent y, key, treasure, two handles, lock
    assert_eq!(trace.num_factors(), 7);
    let mut groups: Vec<Vec<usize>> = trace.factors.iter().map(|f| f.variables.clone()).collect();
    groups.sort();
    assert_eq!(groups, vec![vec![0], vec![1], vec![2, 3], vec![4, 5], vec![6], vec![7], vec![8]]);

    let masks = find_masks(&log, &model.mask_thresholds).unwrap();
    let flips: Vec<&Mask> = log
        .transitions
        .iter()
        .zip(&masks.per_transition)
        .filter(|(t, _)| {
            let d = env.decode(&t.start);
            t.option == INTERACT && env.tile(d.row, d.col) == b'1' && env.decode(&t.end).handle1 != d.handle1
        })
        .map(|(_, m)| m)
        .collect();
    assert!(!flips.is_empty());
    assert!(flips.iter().all(|m| m.0 == vec![6]));
}
