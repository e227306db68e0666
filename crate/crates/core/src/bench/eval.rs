use rand_chacha::ChaCha8Rng;

use std::path::Path;

use super::artifacts::load_actors;
use super::metrics::{distance_to_mne, equilibrium, mean_std, probe_policies};
use crate::envs::{Action, ActionSpec, MarkovGame, ParticleWorld, Scenario};
use crate::error::{check_len, Error, Result};
use crate::marl::{select_action, Mode};
use crate::nn::Mlp;
use crate::rng::{mix, stream, Stream};

/// Joint policy: observations in, one action per agent out.
pub type Policy<'a> = dyn FnMut(&[Vec<f64>]) -> Vec<Action> + 'a;

/// Reference adversary win rates (mean, std) for physical deception, by
/// wrapper: gd, la, eg, la-eg.
pub const REFERENCE_WIN_RATES: [(&str, f64, f64); 4] =
    [("gd", 0.45, 0.16), ("la", 0.53, 0.11), ("eg", 0.56, 0.27), ("la-eg", 0.51, 0.14)];

/// Trained actors acting greedily, or sampling when `stochastic`.
pub struct ActorPolicy {
    actors: Vec<Mlp<f32>>,
    specs: Vec<ActionSpec>,
    mode: Mode,
    rng: ChaCha8Rng,
}

impl ActorPolicy {
    pub fn new(actors: Vec<Mlp<f32>>, specs: &[ActionSpec], stochastic: bool, seed: u64) -> Result<Self> {
        check_len("actors", actors.len(), specs.len())?;
        for (a, s) in actors.iter().zip(specs) {
            if a.output_dim() != s.width() {
                return Err(Error::invalid(format!("actor with {} outputs cannot drive {s:?}", a.output_dim())));
            }
        }
        Ok(Self {
            actors,
            specs: specs.to_vec(),
            mode: if stochastic { Mode::Explore } else { Mode::Exploit },
            rng: stream(seed, Stream::Eval),
        })
    }

    pub fn act(&mut self, obs: &[Vec<f64>]) -> Vec<Action> {
        self.actors
            .iter()
            .zip(&self.specs)
            .zip(obs)
            .map(|((a, &s), o)| {
                select_action(a, s, o, self.mode, 0.1, &mut self.rng)
                    .expect("observation width fixed by the environment")
                    .0
            })
            .collect()
    }
}

/// Environment seeds shared by every evaluation, so methods face the same
/// test set.
pub fn test_env_seeds(n: usize) -> Vec<u64> {
    (0..n as u64).map(|k| mix(0xE7A1_0000 + k)).collect()
}

fn play(world: &mut ParticleWorld, seed: u64, policy: &mut Policy) -> Result<Vec<f64>> {
    let mut obs = world.reset(seed);
    let mut totals = vec![0.0; world.spec().n_agents];
    loop {
        let step = world.step(&policy(&obs))?;
        for (t, r) in totals.iter_mut().zip(&step.rewards) {
            *t += r;
        }
        obs = step.observations;
        if step.done {
            return Ok(totals);
        }
    }
}

/// One deception episode: 1 if at the last step the adversary is strictly
/// closer to the target than the nearest good agent, 0 if farther, 0.5 on a tie.
pub fn win_rate_episode(world: &mut ParticleWorld, seed: u64, policy: &mut Policy) -> Result<f64> {
    if world.scenario() != Scenario::PhysicalDeception {
        return Err(Error::invalid("win rate is defined for physical deception only"));
    }
    play(world, seed, policy)?;
    Ok(world.adversary_outcome())
}

/// Undiscounted return of the first adversary over one episode.
pub fn adversary_reward_episode(world: &mut ParticleWorld, seed: u64, policy: &mut Policy) -> Result<f64> {
    Ok(play(world, seed, policy)?[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub per_seed: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over seeds.
    pub std: f64,
}

impl Summary {
    pub fn from_values(per_seed: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&per_seed);
        Self { per_seed, mean, std }
    }
}

/// Win rate per trained seed over `test_envs` fresh environments.
pub fn evaluate_win_rate(policies: &mut [&mut Policy], test_envs: usize) -> Result<Summary> {
    if policies.is_empty() {
        return Err(Error::invalid("no policies to evaluate"));
    }
    let seeds = test_env_seeds(test_envs);
    let mut world = ParticleWorld::new(Scenario::PhysicalDeception);
    let mut per_seed = Vec::with_capacity(policies.len());
    for p in policies.iter_mut() {
        let mut wins = 0.0;
        for &s in &seeds {
            wins += win_rate_episode(&mut world, s, p)?;
        }
        per_seed.push(wins / test_envs as f64);
    }
    Ok(Summary::from_values(per_seed))
}

/// Adversaries from `adversaries[k]` against good agents from `prey[k]`,
/// mean adversary return over the test set per pair.
pub fn cross_play(
    scenario: Scenario,
    adversaries: &[Vec<Mlp<f32>>],
    prey: &[Vec<Mlp<f32>>],
    test_envs: usize,
    stochastic: bool,
) -> Result<Summary> {
    check_len("paired seeds", prey.len(), adversaries.len())?;
    if adversaries.is_empty() {
        return Err(Error::invalid("no checkpoints to pair"));
    }
    let mut world = ParticleWorld::new(scenario);
    let n_adv = world.n_adversaries();
    let specs = world.spec().actions.clone();
    let seeds = test_env_seeds(test_envs);
    let mut per_seed = Vec::with_capacity(adversaries.len());
    for (k, (a, b)) in adversaries.iter().zip(prey).enumerate() {
        check_len("adversary team", a.len(), specs.len())?;
        check_len("good team", b.len(), specs.len())?;
        for (x, y) in a.iter().zip(b) {
            if x.dims() != y.dims() {
                return Err(Error::invalid(format!("incompatible network shapes {:?} and {:?}", x.dims(), y.dims())));
            }
        }
        let mixed: Vec<Mlp<f32>> = a[..n_adv].iter().chain(&b[n_adv..]).cloned().collect();
        let mut policy = ActorPolicy::new(mixed, &specs, stochastic, k as u64)?;
        let mut total = 0.0;
        for &s in &seeds {
            total += adversary_reward_episode(&mut world, s, &mut |o| policy.act(o))?;
        }
        per_seed.push(total / test_envs as f64);
    }
    Ok(Summary::from_values(per_seed))
}

/// All four pairings of two methods, labelled `<adversary method> vs <prey method>`.
pub fn cross_play_matrix(
    scenario: Scenario,
    (label_a, a): (&str, &[Vec<Mlp<f32>>]),
    (label_b, b): (&str, &[Vec<Mlp<f32>>]),
    test_envs: usize,
    stochastic: bool,
) -> Result<Vec<(String, Summary)>> {
    let pairs =
        [(label_a, a, label_a, a), (label_a, a, label_b, b), (label_b, b, label_b, b), (label_b, b, label_a, a)];
    pairs
        .into_iter()
        .map(|(la, xa, lb, xb)| Ok((format!("{la} vs {lb}"), cross_play(scenario, xa, xb, test_envs, stochastic)?)))
        .collect()
}

/// Distance to the known equilibrium of the actors stored in a checkpoint directory.
pub fn checkpoint_distance(dir: &Path) -> Result<f64> {
    let (manifest, actors) = load_actors(dir)?;
    let eq = equilibrium(manifest.env)
        .ok_or_else(|| Error::invalid(format!("{} has no known equilibrium", manifest.env)))?;
    distance_to_mne(&probe_policies(&actors)?, &eq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn still(n: usize) -> impl FnMut(&[Vec<f64>]) -> Vec<Action> {
        move |_| vec![Action::Continuous(vec![0.0, 0.0]); n]
    }

    /// Steers toward the goal using observation slots: good agents see the
    /// goal first; the adversary heads for landmark 0.
    fn toward(rel: &[f64]) -> Action {
        let n = rel[0].hypot(rel[1]).max(1e-9);
        Action::Continuous(vec![rel[0] / n, rel[1] / n])
    }

    #[test]
    fn adversary_on_target_wins() {
        let mut w = ParticleWorld::new(Scenario::PhysicalDeception);
        w.reset(0);
        let goal = w.landmarks()[w.goal()].pos;
        let mut agents: Vec<[f64; 2]> = w.agents().iter().map(|a| a.pos).collect();
        agents[0] = goal;
        agents[1] = [goal[0] + 5.0, goal[1]];
        agents[2] = [goal[0] - 5.0, goal[1]];
        let lands: Vec<[f64; 2]> = w.landmarks().iter().map(|l| l.pos).collect();
        w.set_positions(&agents, &lands, w.goal());
        let mut p = still(3);
        for _ in 0..25 {
            w.step(&p(&[])).unwrap();
        }
        assert_eq!(w.adversary_outcome(), 1.0);
    }

    #[test]
    fn win_rate_of_random_policies_is_deterministic() {
        let make = |seed| {
            let mut rng = stream(seed, Stream::Eval);
            move |_: &[Vec<f64>]| {
                use rand::Rng;
                (0..3)
                    .map(|_| Action::Continuous(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]))
                    .collect()
            }
        };
        let run = || {
            let (mut a, mut b) = (make(1), make(2));
            evaluate_win_rate(&mut [&mut a, &mut b], 100).unwrap()
        };
        let s = run();
        assert_eq!(s, run());
        assert!(s.per_seed.iter().all(|r| (0.0..=1.0).contains(r)));
    }

    #[test]
    fn scripted_winner_is_perfect() {
        // The adversary re-reads the target from a good agent's observation
        // relayed through the closure: perfect information always wins.
        let mut p = |obs: &[Vec<f64>]| {
            let goal_from_agent1 = [obs[1][0], obs[1][1]];
            let me_from_agent1 = [obs[1][6], obs[1][7]];
            let rel = [goal_from_agent1[0] - me_from_agent1[0], goal_from_agent1[1] - me_from_agent1[1]];
            vec![
                toward(&rel),
                Action::Continuous(vec![-(obs[1][0]), -(obs[1][1])]),
                Action::Continuous(vec![-(obs[2][0]), -(obs[2][1])]),
            ]
        };
        let s = evaluate_win_rate(&mut [&mut p], 100).unwrap();
        assert!(s.mean > 0.95, "{s:?}");
    }

    #[test]
    fn pursuit_beats_fleeing_prey() {
        let mut w = ParticleWorld::new(Scenario::PredatorPrey);
        let seeds = test_env_seeds(50);
        // Adversary obs: [vel, pos, landmarks(4), other adversary(2), prey(2), prey vel(2)].
        let chase = |o: &Vec<f64>| toward(&o[10..12]);
        let mut stationary =
            |obs: &[Vec<f64>]| vec![chase(&obs[0]), chase(&obs[1]), Action::Continuous(vec![0.0, 0.0])];
        let mut fleeing = |obs: &[Vec<f64>]| {
            // Prey obs: [vel, pos, landmarks(4), adversary 0, adversary 1].
            let p = &obs[2];
            let away = [-(p[8] + p[10]), -(p[9] + p[11])];
            vec![chase(&obs[0]), chase(&obs[1]), toward(&away)]
        };
        let (mut r_still, mut r_flee) = (0.0, 0.0);
        for &s in &seeds {
            r_still += adversary_reward_episode(&mut w, s, &mut stationary).unwrap();
            r_flee += adversary_reward_episode(&mut w, s, &mut fleeing).unwrap();
        }
        assert!(r_still > r_flee, "{r_still} <= {r_flee}");
    }

    #[test]
    fn win_rate_rejects_predator_prey() {
        let mut w = ParticleWorld::new(Scenario::PredatorPrey);
        assert!(win_rate_episode(&mut w, 0, &mut still(3)).is_err());
    }
}
