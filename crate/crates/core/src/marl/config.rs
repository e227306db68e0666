use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::buffer::BufferPolicy;
use crate::error::{Error, Result};
use crate::nn::AdamConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Maddpg,
    Matd3,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Maddpg => "maddpg",
            Algorithm::Matd3 => "matd3",
        }
    }

    pub fn n_critics(self) -> usize {
        match self {
            Algorithm::Maddpg => 1,
            Algorithm::Matd3 => 2,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maddpg" => Ok(Algorithm::Maddpg),
            "matd3" => Ok(Algorithm::Matd3),
            _ => Err(Error::config(format!("unknown algorithm `{s}`"))),
        }
    }
}

/// Trainer hyperparameters. Defaults are the reference desk-scale settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub tau: f64,
    pub gamma: f64,
    pub buffer_capacity: usize,
    /// `None` picks per environment: full for matrix games, shifting otherwise.
    pub buffer_policy: Option<BufferPolicy>,
    /// Environment steps between learn steps.
    pub t_learn: u64,
    /// Uniform-random environment steps before the policy acts.
    pub t_rand: u64,
    /// Actor and target update period (MATD3).
    pub policy_delay: u64,
    pub target_noise_std: f64,
    pub target_noise_clip: f64,
    /// Std of Gaussian exploration noise for continuous actions.
    pub explore_std: f64,
    pub hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 1024,
            tau: 0.01,
            gamma: 0.95,
            buffer_capacity: 1_500_000,
            buffer_policy: None,
            t_learn: 100,
            t_rand: 1024,
            policy_delay: 2,
            target_noise_std: 0.2,
            target_noise_clip: 0.5,
            explore_std: 0.1,
            hidden: vec![64, 64],
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, beta1: self.beta1, beta2: self.beta2, eps: self.adam_eps }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("lr", self.lr), ("adam_eps", self.adam_eps)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::config(format!("tau must lie in (0, 1], got {}", self.tau)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        for (name, v) in [
            ("target_noise_std", self.target_noise_std),
            ("target_noise_clip", self.target_noise_clip),
            ("explore_std", self.explore_std),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 || self.t_learn == 0 || self.policy_delay == 0 {
            return Err(Error::config("batch_size, buffer_capacity, t_learn and policy_delay must be positive"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::config("hidden widths must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        TrainConfig::default().validate().unwrap();
        let bad = TrainConfig { tau: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { gamma: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn algorithm_names() {
        assert_eq!("matd3".parse::<Algorithm>().unwrap(), Algorithm::Matd3);
        assert!("ppo".parse::<Algorithm>().is_err());
    }
}
