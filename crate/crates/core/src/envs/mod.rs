//! Markov-game environments: one-shot matrix games played repeatedly and a
//! small particle world with two competitive scenarios.

mod matrix;
mod particle;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use matrix::{MatrixGame, MatrixVariant};
pub use particle::{prey_bound_penalty, Entity, ParticleWorld, Scenario};
pub use trace::{record_trace, write_trace, TraceRow};

pub const EPISODE_LENGTH: usize = 25;
pub const GAMMA: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionSpec {
    Discrete(usize),
    /// Box `[-1, 1]^d`.
    Continuous(usize),
}

impl ActionSpec {
    /// Width of the action as fed to a critic (one-hot for discrete).
    pub fn width(self) -> usize {
        match self {
            ActionSpec::Discrete(m) | ActionSpec::Continuous(m) => m,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    pub n_agents: usize,
    pub obs_dims: Vec<usize>,
    pub actions: Vec<ActionSpec>,
    pub episode_length: usize,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub observations: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub done: bool,
}

pub trait MarkovGame: Send {
    fn spec(&self) -> &GameSpec;

    /// Deterministic in `seed`; returns initial observations.
    fn reset(&mut self, seed: u64) -> Vec<Vec<f64>>;

    fn step(&mut self, actions: &[Action]) -> Result<Step>;

    /// Flattened full state.
    fn state(&self) -> Vec<f64>;

    fn observations(&self) -> Vec<Vec<f64>>;

    /// Steps taken since the last reset.
    fn time(&self) -> usize;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvId {
    Rps,
    MatchingPennies,
    PredatorPrey,
    PhysicalDeception,
}

impl EnvId {
    pub const ALL: [EnvId; 4] = [EnvId::Rps, EnvId::MatchingPennies, EnvId::PredatorPrey, EnvId::PhysicalDeception];

    pub fn as_str(self) -> &'static str {
        match self {
            EnvId::Rps => "rps",
            EnvId::MatchingPennies => "matching_pennies",
            EnvId::PredatorPrey => "predator_prey",
            EnvId::PhysicalDeception => "physical_deception",
        }
    }

    pub fn is_matrix(self) -> bool {
        matches!(self, EnvId::Rps | EnvId::MatchingPennies)
    }

    pub fn make(self) -> Env {
        match self {
            EnvId::Rps => Env::Matrix(MatrixGame::new(MatrixVariant::Rps)),
            EnvId::MatchingPennies => Env::Matrix(MatrixGame::new(MatrixVariant::MatchingPennies)),
            EnvId::PredatorPrey => Env::Particle(ParticleWorld::new(Scenario::PredatorPrey)),
            EnvId::PhysicalDeception => Env::Particle(ParticleWorld::new(Scenario::PhysicalDeception)),
        }
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvId::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown environment `{s}`")))
    }
}

/// Any of the bundled environments.
#[derive(Clone, Debug)]
pub enum Env {
    Matrix(MatrixGame),
    Particle(ParticleWorld),
}

impl MarkovGame for Env {
    fn spec(&self) -> &GameSpec {
        match self {
            Env::Matrix(g) => g.spec(),
            Env::Particle(w) => w.spec(),
        }
    }

    fn reset(&mut self, seed: u64) -> Vec<Vec<f64>> {
        match self {
            Env::Matrix(g) => g.reset(seed),
            Env::Particle(w) => w.reset(seed),
        }
    }

    fn step(&mut self, actions: &[Action]) -> Result<Step> {
        match self {
            Env::Matrix(g) => g.step(actions),
            Env::Particle(w) => w.step(actions),
        }
    }

    fn state(&self) -> Vec<f64> {
        match self {
            Env::Matrix(g) => g.state(),
            Env::Particle(w) => w.state(),
        }
    }

    fn observations(&self) -> Vec<Vec<f64>> {
        match self {
            Env::Matrix(g) => g.observations(),
            Env::Particle(w) => w.observations(),
        }
    }

    fn time(&self) -> usize {
        match self {
            Env::Matrix(g) => g.time(),
            Env::Particle(w) => w.time(),
        }
    }
}

pub(crate) fn check_actions(spec: &GameSpec, actions: &[Action]) -> Result<()> {
    crate::error::check_len("joint action", actions.len(), spec.n_agents)?;
    for (i, (a, s)) in actions.iter().zip(&spec.actions).enumerate() {
        match (a, s) {
            (Action::Discrete(k), ActionSpec::Discrete(m)) if k < m => {}
            (Action::Continuous(v), ActionSpec::Continuous(d)) if v.len() == *d => {}
            _ => return Err(Error::invalid(format!("agent {i}: action {a:?} does not fit {s:?}"))),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_ids_parse() {
        for id in EnvId::ALL {
            assert_eq!(id.as_str().parse::<EnvId>().unwrap(), id);
            assert_eq!(id.make().spec().episode_length, EPISODE_LENGTH);
        }
        assert!(matches!("chess".parse::<EnvId>(), Err(Error::Config(_))));
    }
}
