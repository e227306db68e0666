use ndarray::Array2;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::agent::{JointNets, Layout};
use super::buffer::{Batch, BufferPolicy, ReplayBuffer, Transition};
use super::config::{Algorithm, TrainConfig};
use super::explore::{select_action, Mode};
use crate::envs::{ActionSpec, GameSpec, MarkovGame};
use crate::error::Result;
use crate::nn::{adam_step, soft_update, AdamState, Mlp};
use crate::rng::{stream, Stream};
use crate::Scalar;

/// Optimizer moments for one agent's networks.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentOptim<T> {
    pub actor: AdamState<T>,
    pub critics: Vec<AdamState<T>>,
}

/// Gradient norms from the most recent learn step, per agent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradNorms {
    pub critic: Vec<f64>,
    /// Stale on learn steps that skip the actor.
    pub actor: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeStats {
    /// Undiscounted return per agent.
    pub rewards: Vec<f64>,
    pub learn_steps: u64,
}

/// Centralized-critic trainer: owns networks, optimizers, replay and RNG streams.
#[derive(Clone, Debug)]
pub struct Trainer<T = f32> {
    pub nets: JointNets<T>,
    pub optim: Vec<AgentOptim<T>>,
    pub buffer: ReplayBuffer<T>,
    pub cfg: TrainConfig,
    pub grad_norms: GradNorms,
    env_rng: ChaCha8Rng,
    explore_rng: ChaCha8Rng,
    sample_rng: ChaCha8Rng,
    env_steps: u64,
    learn_steps: u64,
    episodes: u64,
}

/// One Adam step on a network's flattened parameters.
pub(crate) fn adam_on<T: Scalar>(net: &mut Mlp<T>, grad: &[T], state: &mut AdamState<T>) -> Result<()> {
    let mut p = net.params();
    adam_step(&mut p, grad, state)?;
    net.set_params(&p)
}

impl<T: Scalar> Trainer<T> {
    pub fn new(spec: &GameSpec, algorithm: Algorithm, cfg: TrainConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let layout = Layout::new(spec);
        let nets = JointNets::new(layout, algorithm, &cfg.hidden, cfg.gamma, &mut stream(seed, Stream::Init))?;
        let policy = cfg.buffer_policy.unwrap_or_else(|| default_buffer_policy(spec));
        let buffer = ReplayBuffer::new(
            policy,
            cfg.buffer_capacity,
            nets.layout.total_obs(),
            nets.layout.total_act(),
            spec.n_agents,
        )?;
        let optim = fresh_optim(&nets, &cfg);
        let n = spec.n_agents;
        Ok(Self {
            nets,
            optim,
            buffer,
            grad_norms: GradNorms { critic: vec![0.0; n], actor: vec![0.0; n] },
            cfg,
            env_rng: stream(seed, Stream::Env),
            explore_rng: stream(seed, Stream::Exploration),
            sample_rng: stream(seed, Stream::Sampling),
            env_steps: 0,
            learn_steps: 0,
            episodes: 0,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.nets.algorithm
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn learn_steps(&self) -> u64 {
        self.learn_steps
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    /// Sets the learning rate of every base optimizer.
    pub fn set_lr(&mut self, lr: f64) {
        let lr = T::of(lr);
        for o in &mut self.optim {
            o.actor.lr = lr;
            for c in &mut o.critics {
                c.lr = lr;
            }
        }
    }

    pub fn reset_optimizers(&mut self) {
        for o in &mut self.optim {
            o.actor.reset();
            o.critics.iter_mut().for_each(AdamState::reset);
        }
    }

    /// Whether the next learn step updates actors and targets.
    pub fn is_actor_step(&self) -> bool {
        match self.nets.algorithm {
            Algorithm::Maddpg => true,
            Algorithm::Matd3 => (self.learn_steps + 1).is_multiple_of(self.cfg.policy_delay),
        }
    }

    /// One batch per agent, with smoothing noise for MATD3. `None` if the
    /// buffer cannot yet fill a batch.
    pub fn sample_batches(&mut self) -> Option<Vec<Batch<T>>> {
        if self.buffer.len() < self.cfg.batch_size {
            return None;
        }
        let n = self.nets.n_agents();
        let mut batches = Vec::with_capacity(n);
        for _ in 0..n {
            let mut b = self.buffer.sample(self.cfg.batch_size, &mut self.sample_rng)?;
            if self.nets.algorithm == Algorithm::Matd3 {
                b.target_noise = Some(self.draw_noise(b.len()));
            }
            batches.push(b);
        }
        Some(batches)
    }

    fn draw_noise(&mut self, rows: usize) -> Vec<Array2<T>> {
        let (std, clip) = (self.cfg.target_noise_std, self.cfg.target_noise_clip);
        let rng = &mut self.sample_rng;
        self.nets
            .layout
            .actions
            .iter()
            .map(|a| {
                Array2::from_shape_simple_fn((rows, a.width()), || {
                    let z: f64 = StandardNormal.sample(rng);
                    T::of((std * z).clamp(-clip, clip))
                })
            })
            .collect()
    }

    /// The plain learn step: per agent, critics then actor, each with one
    /// base-optimizer step; targets follow after all agents.
    pub fn learn_step(&mut self) -> Result<bool> {
        let Some(batches) = self.sample_batches() else {
            return Ok(false);
        };
        self.learn_on(&batches)?;
        Ok(true)
    }

    pub fn learn_on(&mut self, batches: &[Batch<T>]) -> Result<()> {
        let actor_step = self.is_actor_step();
        for (i, batch) in batches.iter().enumerate() {
            let y = self.nets.targets(i, batch)?;
            for k in 0..self.nets.agents[i].critics.len() {
                let (_, g) = self.nets.critic_gradient(i, k, batch, &y)?;
                if k == 0 {
                    self.grad_norms.critic[i] = g.norm();
                }
                adam_on(&mut self.nets.agents[i].critics[k], &g, &mut self.optim[i].critics[k])?;
            }
            if actor_step {
                let (_, g) = self.nets.actor_gradient(i, batch)?;
                self.grad_norms.actor[i] = g.norm();
                adam_on(&mut self.nets.agents[i].actor, &g, &mut self.optim[i].actor)?;
            }
        }
        self.finish_learn_step(actor_step)
    }

    /// Target soft-updates (on actor steps) and the learn-step counter.
    pub fn finish_learn_step(&mut self, actor_step: bool) -> Result<()> {
        if actor_step {
            let tau = T::of(self.cfg.tau);
            for agent in &mut self.nets.agents {
                let p = soft_update(&agent.target_actor.params(), &agent.actor.params(), tau)?;
                agent.target_actor.set_params(&p)?;
                for (t, c) in agent.target_critics.iter_mut().zip(&agent.critics) {
                    let p = soft_update(&t.params(), &c.params(), tau)?;
                    t.set_params(&p)?;
                }
            }
        }
        self.learn_steps += 1;
        Ok(())
    }

    /// Plays one episode, storing transitions and calling `learn` every
    /// `t_learn` environment steps.
    pub fn run_episode(
        &mut self,
        env: &mut dyn MarkovGame,
        learn: &mut dyn FnMut(&mut Self) -> Result<()>,
    ) -> Result<EpisodeStats> {
        let n = env.spec().n_agents;
        let actions_spec = env.spec().actions.clone();
        let mut obs = env.reset(self.env_rng.next_u64());
        let mut totals = vec![0.0; n];
        let learn_before = self.learn_steps;
        loop {
            let mode = if self.env_steps < self.cfg.t_rand { Mode::Random } else { Mode::Explore };
            let mut actions = Vec::with_capacity(n);
            let mut encoded = Vec::with_capacity(self.nets.layout.total_act());
            for (i, o) in obs.iter().enumerate() {
                let (a, enc) = select_action(
                    &self.nets.agents[i].actor,
                    actions_spec[i],
                    o,
                    mode,
                    self.cfg.explore_std,
                    &mut self.explore_rng,
                )?;
                actions.push(a);
                encoded.extend(enc);
            }
            let step = env.step(&actions)?;
            let flat = |v: &[Vec<f64>]| v.iter().flatten().map(|&x| T::of(x)).collect::<Vec<T>>();
            self.buffer.store(&Transition {
                obs: flat(&obs),
                actions: encoded,
                rewards: step.rewards.iter().map(|&r| T::of(r)).collect(),
                next_obs: flat(&step.observations),
            })?;
            for (t, r) in totals.iter_mut().zip(&step.rewards) {
                *t += r;
            }
            self.env_steps += 1;
            if self.env_steps.is_multiple_of(self.cfg.t_learn) {
                learn(self)?;
            }
            obs = step.observations;
            if step.done {
                break;
            }
        }
        self.episodes += 1;
        Ok(EpisodeStats { rewards: totals, learn_steps: self.learn_steps - learn_before })
    }

    /// Actor output (probabilities or mean action) for agent `i`.
    pub fn policy_output(&self, i: usize, obs: &[f64]) -> Result<Vec<f64>> {
        policy_output(&self.nets.agents[i].actor, obs)
    }

    /// Draws from the exploration stream, e.g. for stochastic evaluation.
    pub fn explore_rng(&mut self) -> &mut impl Rng {
        &mut self.explore_rng
    }
}

pub fn policy_output<T: Scalar>(actor: &Mlp<T>, obs: &[f64]) -> Result<Vec<f64>> {
    let x = Array2::from_shape_vec((1, obs.len()), obs.iter().map(|&v| T::of(v)).collect()).expect("row vector");
    Ok(actor.forward(&x)?.iter().map(|v| v.f64()).collect())
}

pub(crate) fn fresh_optim<T: Scalar>(nets: &JointNets<T>, cfg: &TrainConfig) -> Vec<AgentOptim<T>> {
    let adam = cfg.adam();
    nets.agents
        .iter()
        .map(|a| AgentOptim {
            actor: AdamState::new(a.actor.param_count(), &adam),
            critics: a.critics.iter().map(|c| AdamState::new(c.param_count(), &adam)).collect(),
        })
        .collect()
}

fn default_buffer_policy(spec: &GameSpec) -> BufferPolicy {
    if spec.actions.iter().all(|a| matches!(a, ActionSpec::Discrete(_))) {
        BufferPolicy::Full
    } else {
        BufferPolicy::Shifting
    }
}

/// Distance between each online network and its target, summed over agents.
pub fn target_gap<T: Scalar>(nets: &JointNets<T>) -> f64 {
    nets.agents
        .iter()
        .map(|a| {
            let mut d = a.actor.params().distance(&a.target_actor.params()).powi(2);
            for (c, t) in a.critics.iter().zip(&a.target_critics) {
                d += c.params().distance(&t.params()).powi(2);
            }
            d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::EnvId;

    fn small_cfg() -> TrainConfig {
        TrainConfig { batch_size: 32, t_rand: 50, t_learn: 10, hidden: vec![16], ..Default::default() }
    }

    fn trainer(env: EnvId, algo: Algorithm, seed: u64) -> Trainer<f32> {
        Trainer::new(env.make().spec(), algo, small_cfg(), seed).unwrap()
    }

    fn train(t: &mut Trainer<f32>, env: EnvId, episodes: usize) -> Vec<EpisodeStats> {
        let mut e = env.make();
        (0..episodes).map(|_| t.run_episode(&mut e, &mut |t| t.learn_step().map(drop)).unwrap()).collect()
    }

    #[test]
    fn training_is_reproducible() {
        for env in [EnvId::Rps, EnvId::PredatorPrey] {
            let mut a = trainer(env, Algorithm::Maddpg, 3);
            let mut b = trainer(env, Algorithm::Maddpg, 3);
            assert_eq!(train(&mut a, env, 8), train(&mut b, env, 8));
            assert_eq!(a.nets, b.nets);
        }
    }

    #[test]
    fn learn_cadence() {
        let mut t = trainer(EnvId::Rps, Algorithm::Maddpg, 0);
        train(&mut t, EnvId::Rps, 4);
        assert_eq!(t.env_steps(), 100);
        // Learn calls at steps 10..=100; the buffer holds 32 from step 40 on.
        assert_eq!(t.learn_steps(), 7);
    }

    #[test]
    fn matd3_actor_every_second_step() {
        let mut t = trainer(EnvId::Rps, Algorithm::Matd3, 1);
        train(&mut t, EnvId::Rps, 2);
        let mut actor_steps = 0;
        for _ in 0..10 {
            let before = t.nets.agents[0].actor.clone();
            let tgt = t.nets.agents[0].target_critics[0].clone();
            let fired = t.is_actor_step();
            assert!(t.learn_step().unwrap());
            let moved = t.nets.agents[0].actor != before;
            assert_eq!(moved, fired);
            assert_eq!(t.nets.agents[0].target_critics[0] != tgt, fired);
            actor_steps += usize::from(fired);
        }
        assert_eq!(actor_steps, 5);
    }

    #[test]
    fn soft_update_shrinks_target_gap() {
        let mut t = trainer(EnvId::MatchingPennies, Algorithm::Maddpg, 5);
        train(&mut t, EnvId::MatchingPennies, 3);
        for _ in 0..5 {
            t.learn_step().unwrap();
            // Online moved, so measure against the pre-update target with the post-update online weights.
            let online = t.nets.clone();
            let gap_before = target_gap(&online);
            t.finish_learn_step(true).unwrap();
            assert!(target_gap(&t.nets) < gap_before);
        }
    }

    #[test]
    fn critic_fits_fixed_batch() {
        let mut t = trainer(EnvId::Rps, Algorithm::Maddpg, 2);
        train(&mut t, EnvId::Rps, 3);
        let batch = t.sample_batches().unwrap().remove(0);
        let y = t.nets.targets(0, &batch).unwrap();
        let (first, _) = t.nets.critic_gradient(0, 0, &batch, &y).unwrap();
        for _ in 0..100 {
            let (_, g) = t.nets.critic_gradient(0, 0, &batch, &y).unwrap();
            adam_on(&mut t.nets.agents[0].critics[0], &g, &mut t.optim[0].critics[0]).unwrap();
        }
        let (last, _) = t.nets.critic_gradient(0, 0, &batch, &y).unwrap();
        assert!(last < first, "{last} >= {first}");
    }

    #[test]
    fn random_phase_then_policy() {
        let mut t = trainer(EnvId::PhysicalDeception, Algorithm::Matd3, 4);
        let stats = train(&mut t, EnvId::PhysicalDeception, 3);
        assert_eq!(stats.len(), 3);
        assert_eq!(t.buffer.len(), 75);
        assert_eq!(t.buffer.policy(), BufferPolicy::Shifting);
    }
}
