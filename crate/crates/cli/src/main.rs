use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use skillsym::envs::Environment;
use skillsym::explorer::Policy;
use skillsym::harness::{
    oracle_reachable_transitions, parse_config, parse_config_str, run_experiment, run_single, Effect,
    ExperimentConfig,
};
use skillsym::model::{build_model, summary};
use skillsym::trace::TraceLog;

/// Learn symbolic models of skills and explore actively to improve them.
#[derive(Parser)]
#[command(name = "skillsym", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured policy and write CSV metrics and traces.
    Run(Common),
    /// Print the reachable ground-truth symbolic transitions.
    Oracle(Common),
    /// Learn a model from a trace (or a fresh run) and print it.
    Inspect {
        #[command(flatten)]
        common: Common,
        /// Trace file written by `run`; without it the first policy is run once.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Key = value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// asteroids or treasure.
    #[arg(long)]
    domain: Option<String>,
    /// Comma separated list of active, greedy, random.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any other config key, as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut owned: Vec<(String, String)> = Vec::new();
        let mut flag = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                owned.push((k.to_string(), v));
            }
        };
        flag("domain", self.domain.clone());
        flag("policy", self.policy.clone());
        flag("budget", self.budget.map(|v| v.to_string()));
        flag("runs", self.runs.map(|v| v.to_string()));
        flag("seed", self.seed.map(|v| v.to_string()));
        flag("out", self.out.as_ref().map(|p| p.display().to_string()));
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set expects KEY=VALUE, got {kv:?}");
            };
            owned.push((k.trim().to_string(), v.trim().to_string()));
        }
        let overrides: Vec<(&str, &str)> = owned.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        Ok(match &self.config {
            Some(path) => parse_config(path, &overrides)?,
            None => parse_config_str("", &overrides)?,
        })
    }
}

fn format_effect(e: &Effect) -> String {
    if e.is_empty() {
        return "none".into();
    }
    e.iter().map(|(i, v)| format!("v{i}={v}")).collect::<Vec<_>>().join(",")
}

fn oracle(config: &ExperimentConfig) -> Result<()> {
    let domain = config.build_domain()?;
    let transitions = oracle_reachable_transitions(&domain);
    println!("option\tpartition\toutcome");
    for t in &transitions {
        let partition: Vec<String> = t
            .partition
            .iter()
            .map(|(e, p)| format!("{}:{}", format_effect(e), *p as f64 / 1e9))
            .collect();
        println!(
            "{}\t{}\t{}",
            domain.option_name(t.option),
            partition.join(" "),
            format_effect(&t.effect)
        );
    }
    eprintln!("{} reachable transitions", transitions.len());
    Ok(())
}

fn inspect(config: &ExperimentConfig, trace: Option<&PathBuf>) -> Result<()> {
    let domain = config.build_domain()?;
    let log = match trace {
        Some(path) => TraceLog::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => {
            let policy = config.policies.first().copied().unwrap_or(Policy::Random);
            run_single(config, policy, 0)?.log
        }
    };
    let model = build_model(&log, domain.num_options(), &config.model)?;
    print!("{}", summary(&model));
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(common) => {
            let config = common.load()?;
            let out = run_experiment(&config)?;
            for (policy, runs) in &out.results {
                let finals: Vec<f64> = runs
                    .iter()
                    .filter_map(|r| r.rows.last())
                    .map(|row| row.unobserved as f64)
                    .collect();
                let mean = finals.iter().sum::<f64>() / finals.len().max(1) as f64;
                println!("{policy}: mean unobserved transitions at budget end {mean:.2}");
            }
            println!("wrote {} files to {}", out.files.len(), config.out.display());
        }
        Command::Oracle(common) => oracle(&common.load()?)?,
        Command::Inspect { common, trace } => inspect(&common.load()?, trace.as_ref())?,
    }
    Ok(())
}
