use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::envs::EnvId;
use crate::error::{Error, Result};
use crate::marl::{Algorithm, TrainConfig};
use crate::vi_marl::{BaseOptimizer, LookaheadConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WrapperKind {
    Gd,
    La,
    Eg,
    LaEg,
}

impl WrapperKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WrapperKind::Gd => "gd",
            WrapperKind::La => "la",
            WrapperKind::Eg => "eg",
            WrapperKind::LaEg => "la-eg",
        }
    }

    pub fn uses_lookahead(self) -> bool {
        matches!(self, WrapperKind::La | WrapperKind::LaEg)
    }

    pub fn uses_eg(self) -> bool {
        matches!(self, WrapperKind::Eg | WrapperKind::LaEg)
    }
}

impl fmt::Display for WrapperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WrapperKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [WrapperKind::Gd, WrapperKind::La, WrapperKind::Eg, WrapperKind::LaEg]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown optimizer wrapper `{s}`")))
    }
}

/// Optimizer wrapper around the base trainer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrapperConfig {
    pub kind: WrapperKind,
    /// Lookahead periods in episodes; defaults depend on the environment.
    #[serde(default)]
    pub periods: Option<Vec<u64>>,
    #[serde(default = "half")]
    pub alpha_theta: f64,
    #[serde(default = "half")]
    pub alpha_w: f64,
    #[serde(default)]
    pub reset_optimizer: bool,
    #[serde(default = "one")]
    pub extrapolation_steps: usize,
}

fn half() -> f64 {
    0.5
}

fn one() -> usize {
    1
}

impl WrapperConfig {
    pub fn gd() -> Self {
        Self::of(WrapperKind::Gd)
    }

    pub fn of(kind: WrapperKind) -> Self {
        Self {
            kind,
            periods: None,
            alpha_theta: half(),
            alpha_w: half(),
            reset_optimizer: false,
            extrapolation_steps: one(),
        }
    }

    pub fn lookahead(periods: &[u64], alpha: f64) -> Self {
        Self { periods: Some(periods.to_vec()), alpha_theta: alpha, alpha_w: alpha, ..Self::of(WrapperKind::La) }
    }

    pub fn base(&self) -> BaseOptimizer {
        if self.kind.uses_eg() {
            BaseOptimizer::Eg { extrapolation_steps: self.extrapolation_steps }
        } else {
            BaseOptimizer::Gd
        }
    }

    pub fn lookahead_config(&self, env: EnvId) -> Option<LookaheadConfig> {
        self.kind.uses_lookahead().then(|| LookaheadConfig {
            periods: self.periods.clone().unwrap_or_else(|| default_periods(env)),
            alpha_theta: self.alpha_theta,
            alpha_w: self.alpha_w,
            reset_optimizer: self.reset_optimizer,
        })
    }
}

pub fn default_periods(env: EnvId) -> Vec<u64> {
    if env.is_matrix() {
        vec![10]
    } else {
        vec![10, 100]
    }
}

pub fn default_episodes(env: EnvId) -> u64 {
    if env.is_matrix() {
        10_000
    } else {
        20_000
    }
}

/// Multiply the learning rate by `factor` once `episode` episodes are done.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrEvent {
    pub episode: u64,
    pub factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub test_envs: usize,
    /// Sample actions instead of acting greedily.
    pub stochastic: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { test_envs: 100, stochastic: false }
    }
}

/// A complete experiment: environment, trainer, wrapper and seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvId,
    #[serde(default = "maddpg")]
    pub algorithm: Algorithm,
    #[serde(default = "WrapperConfig::gd")]
    pub wrapper: WrapperConfig,
    #[serde(default)]
    pub episodes: Option<u64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub lr_schedule: Vec<LrEvent>,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: u64,
}

fn maddpg() -> Algorithm {
    Algorithm::Maddpg
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_checkpoint_every() -> u64 {
    5000
}

impl ExperimentConfig {
    pub fn new(env: EnvId, algorithm: Algorithm, wrapper: WrapperConfig) -> Self {
        Self {
            env,
            algorithm,
            wrapper,
            episodes: None,
            seeds: default_seeds(),
            train: TrainConfig::default(),
            lr_schedule: Vec::new(),
            eval: EvalConfig::default(),
            checkpoint_every: default_checkpoint_every(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingArtifact(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn episodes(&self) -> u64 {
        self.episodes.unwrap_or_else(|| default_episodes(self.env))
    }

    /// `<env>_<algorithm>_<wrapper>`.
    pub fn run_name(&self) -> String {
        format!("{}_{}_{}", self.env, self.algorithm, self.wrapper.kind)
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes() == 0 {
            return Err(Error::config("episodes must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        self.train.validate()?;
        if let Some(la) = self.wrapper.lookahead_config(self.env) {
            la.validate()?;
        } else if self.wrapper.periods.is_some() {
            return Err(Error::config(format!("lookahead periods given for wrapper `{}`", self.wrapper.kind)));
        }
        for ev in &self.lr_schedule {
            if !(ev.factor > 0.0 && ev.factor.is_finite()) || ev.episode == 0 {
                return Err(Error::config(format!("invalid learning-rate event {ev:?}")));
            }
        }
        if self.eval.test_envs == 0 {
            return Err(Error::config("eval.test_envs must be positive"));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::config("checkpoint_every must be positive"));
        }
        Ok(())
    }
}
