use std::fs;
use std::path::Path;

use skillsym::harness::{parse_config_str, run_experiment, ExperimentConfig, HarnessError};

fn config(out: &Path, extra: &[(&str, &str)]) -> ExperimentConfig {
    let out = out.to_str().unwrap();
    let mut overrides = vec![
        ("domain", "asteroids"),
        ("layout", "toy"),
        ("runs", "2"),
        ("budget", "5"),
        ("mcts_updates", "50"),
        ("seed", "11"),
        ("out", out),
    ];
    overrides.extend_from_slice(extra);
    parse_config_str("", &overrides).unwrap()
}

fn csv_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(String::from).collect()
}

#[test]
fn writes_one_row_per_run_and_execution() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&config(dir.path(), &[])).unwrap();
    for policy in ["active", "greedy", "random"] {
        let rows = csv_rows(&dir.path().join(format!("asteroids_{policy}_runs.csv")));
        assert_eq!(rows.len(), 10, "{policy}");
        assert_eq!(csv_rows(&dir.path().join(format!("asteroids_{policy}_aggregate.csv"))).len(), 5);
        for run in 0..2 {
            assert!(dir.path().join(format!("traces/asteroids_{policy}_run{run}.tsv")).exists());
        }
    }
    assert!(dir.path().join("config.txt").exists());
    assert!(out.files.iter().all(|f| f.exists()));
    assert_eq!(out.results.len(), 3);
}

#[test]
fn outputs_are_byte_identical_across_reruns() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_experiment(&config(a.path(), &[])).unwrap();
    run_experiment(&config(b.path(), &[])).unwrap();
    for f in &first.files {
        let rel = f.strip_prefix(a.path()).unwrap();
        if rel == Path::new("config.txt") {
            continue;
        }
        assert_eq!(fs::read(f).unwrap(), fs::read(b.path().join(rel)).unwrap(), "{}", rel.display());
    }
}

#[test]
fn seeds_differ_between_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&config(dir.path(), &[("policy", "random")])).unwrap();
    let runs = &out.results.values().next().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!((runs[0].seed, runs[1].seed), (11, 12));
    assert_ne!(runs[0].log, runs[1].log);
}

#[test]
fn unwritable_output_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = config(&blocker.join("out"), &[("runs", "100000"), ("budget", "1000")]);
    match run_experiment(&cfg) {
        Err(HarnessError::Io { path, .. }) => assert!(path.starts_with(&blocker)),
        other => panic!("expected an io error, got {other:?}"),
    }
}
