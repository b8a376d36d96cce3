//! Experiment orchestration: configuration, ground-truth oracles, metrics
//! and CSV output.

mod config;
mod domain;
mod experiment;
mod metrics;
mod oracle;

pub use config::{parse_config, parse_config_str, ConfigError, EnvParams, ExperimentConfig, CONFIG_KEYS};
pub use domain::{AsteroidsLayout, Domain, DomainKind};
pub use experiment::{
    aggregate, aggregate_csv, heatmap_csv, run_experiment, run_single, runs_csv, AggregateRow, ExperimentOutput,
    HarnessError, RunResult, Z99,
};
pub use metrics::{compute_metrics, MetricsRow};
pub use oracle::{effect_of, oracle_reachable_transitions, Effect, EffectDistribution, GroundTransition};
