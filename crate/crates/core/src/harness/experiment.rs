use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig};
use super::domain::Domain;
use super::metrics::{compute_metrics, MetricsRow};
use super::oracle::oracle_reachable_transitions;
use crate::envs::EnvError;
use crate::explorer::{explore_run, ExploreError, Policy};
use crate::model::ModelError;
use crate::rng::RandomSource;
use crate::trace::{TraceError, TraceLog};

/// z-value of a two-sided 99% normal interval.
pub const Z99: f64 = 2.576;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Outcome of one seeded exploration run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub policy: Policy,
    pub run: usize,
    pub seed: u64,
    pub log: TraceLog,
    pub rows: Vec<MetricsRow>,
}

/// Run `policy` once with seed `config.seed + run`.
pub fn run_single(config: &ExperimentConfig, policy: Policy, run: usize) -> Result<RunResult, HarnessError> {
    let mut domain = config.build_domain()?;
    let oracle = oracle_reachable_transitions(&domain);
    let seed = config.seed + run as u64;
    let log = explore_run(&mut domain, policy, &config.exploration, &config.model, &RandomSource::new(seed))?;
    let rows = compute_metrics(&log, &domain, &oracle, run);
    Ok(RunResult {
        policy,
        run,
        seed,
        log,
        rows,
    })
}

/// Per-execution mean and 99% interval half-width of each metric column.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub execution: usize,
    pub mean: Vec<f64>,
    pub half_width: Vec<f64>,
}

/// Aggregate equal-length runs; the half-width is `2.576 sd / sqrt(runs)`
/// with the sample standard deviation (zero for a single run).
pub fn aggregate(runs: &[Vec<MetricsRow>]) -> Vec<AggregateRow> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    let n = runs.len() as f64;
    (0..first.len())
        .map(|k| {
            let values: Vec<Vec<f64>> = runs.iter().map(|r| r[k].values()).collect();
            let cols = values[0].len();
            let mut mean = vec![0.0; cols];
            let mut half_width = vec![0.0; cols];
            for c in 0..cols {
                let m = values.iter().map(|v| v[c]).sum::<f64>() / n;
                mean[c] = m;
                if runs.len() > 1 {
                    let var = values.iter().map(|v| (v[c] - m).powi(2)).sum::<f64>() / (n - 1.0);
                    half_width[c] = Z99 * var.sqrt() / n.sqrt();
                }
            }
            AggregateRow {
                execution: first[k].execution,
                mean,
                half_width,
            }
        })
        .collect()
}

/// Files written by one experiment, plus the in-memory results.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub files: Vec<PathBuf>,
    pub results: BTreeMap<Policy, Vec<RunResult>>,
}

fn write(path: &Path, contents: &str, files: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(io_err(path))?;
    files.push(path.to_path_buf());
    Ok(())
}

pub fn runs_csv(domain: &Domain, results: &[RunResult]) -> String {
    let mut s = format!("run,execution,{}\n", MetricsRow::columns(domain).join(","));
    for r in results {
        for row in &r.rows {
            let vals: Vec<String> = row.values().iter().map(f64::to_string).collect();
            let _ = writeln!(s, "{},{},{}", row.run, row.execution, vals.join(","));
        }
    }
    s
}

pub fn aggregate_csv(domain: &Domain, rows: &[AggregateRow]) -> String {
    let cols = MetricsRow::columns(domain);
    let header: Vec<String> = cols.iter().flat_map(|c| [format!("{c}_mean"), format!("{c}_ci99")]).collect();
    let mut s = format!("execution,{}\n", header.join(","));
    for r in rows {
        let vals: Vec<String> = r
            .mean
            .iter()
            .zip(&r.half_width)
            .flat_map(|(m, h)| [m.to_string(), h.to_string()])
            .collect();
        let _ = writeln!(s, "{},{}", r.execution, vals.join(","));
    }
    s
}

/// Visits per grid cell over the start state of every execution.
pub fn heatmap_csv(domain: &Domain, results: &[RunResult]) -> String {
    let mut counts: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for r in results {
        for t in &r.log.transitions {
            *counts.entry(domain.heatmap_cell(&t.start)).or_default() += 1;
        }
    }
    let mut s = String::from("x,y,count\n");
    for ((x, y), c) in counts {
        let _ = writeln!(s, "{x},{y},{c}");
    }
    s
}

/// Run every configured policy `config.runs` times and write, per policy,
/// `<domain>_<policy>_runs.csv`, `_aggregate.csv`, `_heatmap.csv` and one
/// trace per run under `traces/`. The output directory is created and
/// checked before any run starts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    config.exploration.validate()?;
    config.model.validate()?;
    let domain = config.build_domain()?;
    let out = &config.out;
    let traces = out.join("traces");
    fs::create_dir_all(&traces).map_err(io_err(&traces))?;
    let mut files = Vec::new();
    write(&out.join("config.txt"), &config.describe(), &mut files)?;
    let mut results = BTreeMap::new();
    for &policy in &config.policies {
        let mut runs = Vec::with_capacity(config.runs);
        for run in 0..config.runs {
            let r = run_single(config, policy, run)?;
            let path = traces.join(format!("{}_{}_run{}.tsv", config.domain, policy, run));
            r.log.save(&path).map_err(|e| match e {
                TraceError::Io(source) => HarnessError::Io { path: path.clone(), source },
                other => other.into(),
            })?;
            files.push(path);
            runs.push(r);
        }
        let stem = format!("{}_{}", config.domain, policy);
        write(&out.join(format!("{stem}_runs.csv")), &runs_csv(&domain, &runs), &mut files)?;
        let rows: Vec<Vec<MetricsRow>> = runs.iter().map(|r| r.rows.clone()).collect();
        write(
            &out.join(format!("{stem}_aggregate.csv")),
            &aggregate_csv(&domain, &aggregate(&rows)),
            &mut files,
        )?;
        write(&out.join(format!("{stem}_heatmap.csv")), &heatmap_csv(&domain, &runs), &mut files)?;
        results.insert(policy, runs);
    }
    Ok(ExperimentOutput { files, results })
}
