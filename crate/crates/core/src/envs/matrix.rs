use super::{check_actions, Action, ActionSpec, GameSpec, MarkovGame, Step, EPISODE_LENGTH, GAMMA};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixVariant {
    /// Rock, Paper, Scissors.
    Rps,
    /// Heads, Tails; player 1 ("even") wins on a match.
    MatchingPennies,
}

impl MatrixVariant {
    /// Row player's payoff.
    pub fn payoff(self) -> Vec<Vec<f64>> {
        match self {
            MatrixVariant::Rps => vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]],
            MatrixVariant::MatchingPennies => vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
        }
    }

    pub fn actions(self) -> usize {
        match self {
            MatrixVariant::Rps => 3,
            MatrixVariant::MatchingPennies => 2,
        }
    }

    /// The unique mixed equilibrium, uniform for both games.
    pub fn equilibrium(self) -> Vec<f64> {
        let m = self.actions();
        vec![1.0 / m as f64; m]
    }
}

/// Two-player zero-sum matrix game repeated for a fixed number of rounds.
///
/// Each player observes a one-hot of the opponent's previous action; the last
/// slot marks "no previous action".
#[derive(Clone, Debug)]
pub struct MatrixGame {
    variant: MatrixVariant,
    payoff: Vec<Vec<f64>>,
    spec: GameSpec,
    last: Option<[usize; 2]>,
    t: usize,
}

impl MatrixGame {
    pub fn new(variant: MatrixVariant) -> Self {
        let m = variant.actions();
        Self {
            variant,
            payoff: variant.payoff(),
            spec: GameSpec {
                n_agents: 2,
                obs_dims: vec![m + 1; 2],
                actions: vec![ActionSpec::Discrete(m); 2],
                episode_length: EPISODE_LENGTH,
                gamma: GAMMA,
            },
            last: None,
            t: 0,
        }
    }

    pub fn variant(&self) -> MatrixVariant {
        self.variant
    }

    pub fn payoff(&self) -> &[Vec<f64>] {
        &self.payoff
    }

    pub fn last_actions(&self) -> Option<[usize; 2]> {
        self.last
    }

    /// Observation with the given opponent move (`None` for the first round).
    pub fn encode(m: usize, opponent: Option<usize>) -> Vec<f64> {
        let mut v = vec![0.0; m + 1];
        v[opponent.unwrap_or(m)] = 1.0;
        v
    }

    /// All observations a player can see, "none" last.
    pub fn probe_observations(m: usize) -> Vec<Vec<f64>> {
        (0..m).map(Some).chain([None]).map(|o| Self::encode(m, o)).collect()
    }
}

impl MarkovGame for MatrixGame {
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> Vec<Vec<f64>> {
        self.last = None;
        self.t = 0;
        self.observations()
    }

    fn step(&mut self, actions: &[Action]) -> Result<Step> {
        check_actions(&self.spec, actions)?;
        let idx = |a: &Action| match a {
            Action::Discrete(k) => *k,
            Action::Continuous(_) => unreachable!("checked"),
        };
        let (a1, a2) = (idx(&actions[0]), idx(&actions[1]));
        let r1 = self.payoff[a1][a2];
        self.last = Some([a1, a2]);
        self.t += 1;
        Ok(Step { observations: self.observations(), rewards: vec![r1, -r1], done: self.t >= self.spec.episode_length })
    }

    fn state(&self) -> Vec<f64> {
        let m = self.variant.actions();
        let mut s = Self::encode(m, self.last.map(|l| l[0]));
        s.extend(Self::encode(m, self.last.map(|l| l[1])));
        s
    }

    fn observations(&self) -> Vec<Vec<f64>> {
        let m = self.variant.actions();
        vec![Self::encode(m, self.last.map(|l| l[1])), Self::encode(m, self.last.map(|l| l[0]))]
    }

    fn time(&self) -> usize {
        self.t
    }
}
