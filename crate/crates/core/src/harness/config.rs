use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use super::domain::{AsteroidsLayout, Domain, DomainKind};
use crate::bayes::BetaBernoulli;
use crate::envs::{AsteroidsWorld, EnvError, TreasureConfig, TreasureWorld};
use crate::explorer::{ExplorationConfig, Policy, ScoreNormalization};
use crate::model::{ModelConfig, Thresholds};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value {value:?} for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
}

/// Environment noise parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvParams {
    pub crash_prob: f64,
    pub landing_noise: f64,
    pub heading_noise: f64,
    pub flip_prob: f64,
    pub jump_prob: f64,
    pub jitter_px: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        let t = TreasureConfig::default();
        let a = AsteroidsLayout::Full.config();
        Self {
            crash_prob: a.crash_prob,
            landing_noise: a.landing_noise,
            heading_noise: a.heading_noise,
            flip_prob: t.flip_prob,
            jump_prob: t.jump_prob,
            jitter_px: t.jitter_px,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    /// Asteroids layout; ignored for Treasure.
    pub layout: AsteroidsLayout,
    pub policies: Vec<Policy>,
    pub runs: usize,
    /// Run `r` uses seed `seed + r`.
    pub seed: u64,
    pub out: PathBuf,
    /// Holds the per-run execution budget.
    pub exploration: ExplorationConfig,
    pub model: ModelConfig,
    pub env: EnvParams,
}

/// Every recognised key, in the order `describe` prints them.
pub const CONFIG_KEYS: [&str; 26] = [
    "domain",
    "layout",
    "policy",
    "budget",
    "runs",
    "seed",
    "out",
    "mcts_updates",
    "uct_c",
    "z",
    "normalization",
    "mask_threshold",
    "epsilon",
    "min_samples",
    "alpha",
    "geom_p",
    "bhc_kappa",
    "q_o",
    "precondition_alpha",
    "precondition_beta",
    "crash_prob",
    "landing_noise",
    "heading_noise",
    "flip_prob",
    "jump_prob",
    "jitter_px",
];

impl ExperimentConfig {
    pub fn defaults(domain: DomainKind) -> Self {
        let (budget, threshold, epsilon) = match domain {
            DomainKind::Asteroids => (150, 1e-6, 1.5),
            DomainKind::Treasure => (200, 0.02, 0.05),
        };
        Self {
            domain,
            layout: AsteroidsLayout::Full,
            policies: Policy::ALL.to_vec(),
            runs: 100,
            seed: 0,
            out: PathBuf::from("results"),
            exploration: ExplorationConfig {
                budget,
                ..ExplorationConfig::default()
            },
            model: ModelConfig {
                mask_thresholds: Thresholds::uniform(threshold),
                epsilon,
                ..ModelConfig::default()
            },
            env: EnvParams::default(),
        }
    }

    pub fn budget(&self) -> usize {
        self.exploration.budget
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "domain" => self.domain = parse(key, v)?,
            "layout" => self.layout = parse(key, v)?,
            "policy" => {
                self.policies = v
                    .split(',')
                    .map(|p| parse::<Policy>(key, p.trim()))
                    .collect::<Result<_, _>>()?;
                if self.policies.is_empty() {
                    return Err(invalid(key, v, "at least one policy is required"));
                }
            }
            "budget" => self.exploration.budget = positive(key, v)?,
            "runs" => self.runs = positive(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "mcts_updates" => self.exploration.mcts_updates = positive(key, v)?,
            "uct_c" => self.exploration.uct_c = positive_real(key, v)?,
            "z" => self.exploration.z = nonnegative(key, v)?,
            "normalization" => {
                self.exploration.normalization = match v {
                    "search" => ScoreNormalization::Search,
                    "siblings" => ScoreNormalization::Siblings,
                    _ => return Err(invalid(key, v, "expected search or siblings")),
                }
            }
            "mask_threshold" => {
                let ts: Vec<f64> = v
                    .split(',')
                    .map(|t| positive_real(key, t.trim()))
                    .collect::<Result<_, _>>()?;
                self.model.mask_thresholds = if ts.len() == 1 {
                    Thresholds::uniform(ts[0])
                } else {
                    Thresholds::per_variable(ts)
                };
            }
            "epsilon" => self.model.epsilon = positive_real(key, v)?,
            "min_samples" => self.model.min_samples = positive(key, v)?,
            "alpha" => self.model.alpha = positive_real(key, v)?,
            "geom_p" => self.model.geom_p = open_unit(key, v)?,
            "bhc_kappa" => self.model.bhc_kappa = positive_real(key, v)?,
            "q_o" => self.model.q_o = probability(key, v)?,
            "precondition_alpha" => {
                let a = positive_real(key, v)?;
                self.model.precondition_prior = BetaBernoulli::new(a, self.model.precondition_prior.beta)
                    .map_err(|e| invalid(key, v, e))?;
            }
            "precondition_beta" => {
                let b = positive_real(key, v)?;
                self.model.precondition_prior = BetaBernoulli::new(self.model.precondition_prior.alpha, b)
                    .map_err(|e| invalid(key, v, e))?;
            }
            "crash_prob" => self.env.crash_prob = probability(key, v)?,
            "landing_noise" => self.env.landing_noise = nonnegative(key, v)?,
            "heading_noise" => self.env.heading_noise = nonnegative(key, v)?,
            "flip_prob" => self.env.flip_prob = probability(key, v)?,
            "jump_prob" => self.env.jump_prob = probability(key, v)?,
            "jitter_px" => self.env.jitter_px = nonnegative(key, v)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Current value of every key in `key = value` form; parsing the result
    /// reproduces this config.
    pub fn describe(&self) -> String {
        let join = |xs: Vec<String>| xs.join(",");
        let m = &self.model;
        let values: [String; 26] = [
            self.domain.to_string(),
            self.layout.to_string(),
            join(self.policies.iter().map(Policy::to_string).collect()),
            self.exploration.budget.to_string(),
            self.runs.to_string(),
            self.seed.to_string(),
            self.out.display().to_string(),
            self.exploration.mcts_updates.to_string(),
            self.exploration.uct_c.to_string(),
            self.exploration.z.to_string(),
            match self.exploration.normalization {
                ScoreNormalization::Search => "search",
                ScoreNormalization::Siblings => "siblings",
            }
            .to_string(),
            join(m.mask_thresholds.values().iter().map(f64::to_string).collect()),
            m.epsilon.to_string(),
            m.min_samples.to_string(),
            m.alpha.to_string(),
            m.geom_p.to_string(),
            m.bhc_kappa.to_string(),
            m.q_o.to_string(),
            m.precondition_prior.alpha.to_string(),
            m.precondition_prior.beta.to_string(),
            self.env.crash_prob.to_string(),
            self.env.landing_noise.to_string(),
            self.env.heading_noise.to_string(),
            self.env.flip_prob.to_string(),
            self.env.jump_prob.to_string(),
            self.env.jitter_px.to_string(),
        ];
        CONFIG_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Fresh environment for one run.
    pub fn build_domain(&self) -> Result<Domain, EnvError> {
        Ok(match self.domain {
            DomainKind::Asteroids => {
                let mut cfg = self.layout.config();
                cfg.crash_prob = self.env.crash_prob;
                cfg.landing_noise = self.env.landing_noise;
                cfg.heading_noise = self.env.heading_noise;
                AsteroidsWorld::new(cfg)?.into()
            }
            DomainKind::Treasure => TreasureWorld::new(TreasureConfig {
                flip_prob: self.env.flip_prob,
                jump_prob: self.env.jump_prob,
                jitter_px: self.env.jitter_px,
                ..TreasureConfig::default()
            })?
            .into(),
        })
    }
}

fn invalid(key: &str, value: &str, reason: impl Display) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: Display,
{
    v.parse().map_err(|e| invalid(key, v, e))
}

fn positive(key: &str, v: &str) -> Result<usize, ConfigError> {
    match parse::<usize>(key, v)? {
        0 => Err(invalid(key, v, "must be at least 1")),
        n => Ok(n),
    }
}

fn real(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse(key, v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(key, v, "must be finite"))
    }
}

fn positive_real(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = real(key, v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(key, v, "must be positive"))
    }
}

fn nonnegative(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = real(key, v)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(invalid(key, v, "must not be negative"))
    }
}

fn probability(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = real(key, v)?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(invalid(key, v, "must lie in [0, 1]"))
    }
}

fn open_unit(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = real(key, v)?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(invalid(key, v, "must lie in (0, 1)"))
    }
}

/// Parse `key = value` lines (`#` starts a comment), then apply
/// `overrides` in order. Domain defaults come from the last `domain`
/// setting among both; unset keys keep those defaults.
pub fn parse_config_str(text: &str, overrides: &[(&str, &str)]) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        entries.push((k.trim().to_string(), v.trim().to_string()));
    }
    entries.extend(overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())));
    let domain = match entries.iter().rev().find(|(k, _)| k == "domain") {
        Some((k, v)) => parse(k, v)?,
        None => DomainKind::Asteroids,
    };
    let mut cfg = ExperimentConfig::defaults(domain);
    for (k, v) in &entries {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

pub fn parse_config(path: &Path, overrides: &[(&str, &str)]) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_domain_defaults() {
        let a = parse_config_str("", &[("domain", "asteroids")]).unwrap();
        assert_eq!(a.model.epsilon, 1.5);
        assert_eq!(a.exploration.uct_c, 2.0);
        assert_eq!(a.exploration.mcts_updates, 1000);
        assert_eq!(a.exploration.z, 10.0);
        assert_eq!(a.model.q_o, 0.3);
        assert_eq!(a.model.alpha, 0.5);
        assert_eq!(a.model.geom_p, 0.5);
        assert_eq!(a.model.min_samples, 1);
        let t = parse_config_str("domain = treasure\n", &[]).unwrap();
        assert_eq!(t.model.epsilon, 0.05);
        assert_eq!(t.budget(), 200);
    }

    #[test]
    fn errors_name_the_key() {
        let e = parse_config_str("uct_c=banana", &[]).unwrap_err();
        assert!(matches!(&e, ConfigError::InvalidValue { key, .. } if key == "uct_c"));
        assert!(e.to_string().contains("uct_c"));
        let e = parse_config_str("colour = red", &[]).unwrap_err();
        assert!(e.to_string().contains("colour"));
        assert!(matches!(parse_config_str("runs = 0", &[]), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(parse_config_str("no equals", &[]), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn overrides_and_comments() {
        let text = "# comment\nbudget = 40 # trailing\npolicy = random, greedy\nmask_threshold = 0.1,0.2\n";
        let c = parse_config_str(text, &[("budget", "7"), ("domain", "treasure")]).unwrap();
        assert_eq!(c.budget(), 7);
        assert_eq!(c.domain, DomainKind::Treasure);
        assert_eq!(c.policies, vec![Policy::Random, Policy::Greedy]);
        assert_eq!(c.model.mask_thresholds.values(), &[0.1, 0.2]);
    }

    #[test]
    fn describe_round_trips() {
        let mut c = ExperimentConfig::defaults(DomainKind::Treasure);
        c.set("layout", "desk").unwrap();
        c.set("precondition_beta", "2.5").unwrap();
        c.set("seed", "99").unwrap();
        assert_eq!(parse_config_str(&c.describe(), &[]).unwrap(), c);
    }
}
