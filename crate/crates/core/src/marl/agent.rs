use std::ops::Range;

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rand::Rng;

use super::buffer::Batch;
use super::config::Algorithm;
use crate::envs::{ActionSpec, GameSpec};
use crate::error::{check_len, Result};
use crate::nn::{Head, Mlp, ParamVector};
use crate::Scalar;

/// Where each agent's observation and action live in the flattened joint vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub obs_dims: Vec<usize>,
    pub actions: Vec<ActionSpec>,
    obs_off: Vec<usize>,
    act_off: Vec<usize>,
}

fn offsets(widths: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut off = vec![0];
    for w in widths {
        off.push(off[off.len() - 1] + w);
    }
    off
}

impl Layout {
    pub fn new(spec: &GameSpec) -> Self {
        Self {
            obs_dims: spec.obs_dims.clone(),
            actions: spec.actions.clone(),
            obs_off: offsets(spec.obs_dims.iter().copied()),
            act_off: offsets(spec.actions.iter().map(|a| a.width())),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.obs_dims.len()
    }

    pub fn obs_range(&self, i: usize) -> Range<usize> {
        self.obs_off[i]..self.obs_off[i + 1]
    }

    pub fn act_range(&self, i: usize) -> Range<usize> {
        self.act_off[i]..self.act_off[i + 1]
    }

    pub fn total_obs(&self) -> usize {
        self.obs_off[self.n_agents()]
    }

    pub fn total_act(&self) -> usize {
        self.act_off[self.n_agents()]
    }

    /// Critic input: every observation, then every action.
    pub fn critic_input(&self) -> usize {
        self.total_obs() + self.total_act()
    }

    pub fn actor_head(&self, i: usize) -> Head {
        match self.actions[i] {
            ActionSpec::Discrete(_) => Head::Softmax,
            ActionSpec::Continuous(_) => Head::Tanh,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentNets<T> {
    pub actor: Mlp<T>,
    pub critics: Vec<Mlp<T>>,
    pub target_actor: Mlp<T>,
    pub target_critics: Vec<Mlp<T>>,
}

/// Every agent's online and target networks.
#[derive(Clone, Debug, PartialEq)]
pub struct JointNets<T> {
    pub agents: Vec<AgentNets<T>>,
    pub layout: Layout,
    pub algorithm: Algorithm,
    pub gamma: T,
}

pub(crate) fn joint_input<T: Scalar>(obs: ArrayView2<T>, actions: ArrayView2<T>) -> Array2<T> {
    concatenate![Axis(1), obs, actions]
}

impl<T: Scalar> JointNets<T> {
    /// Fresh networks with targets equal to the online copies.
    pub fn new<R: Rng + ?Sized>(
        layout: Layout,
        algorithm: Algorithm,
        hidden: &[usize],
        gamma: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut agents = Vec::with_capacity(layout.n_agents());
        for i in 0..layout.n_agents() {
            let mut actor_dims = vec![layout.obs_dims[i]];
            actor_dims.extend_from_slice(hidden);
            actor_dims.push(layout.actions[i].width());
            let actor = Mlp::new(&actor_dims, layout.actor_head(i), rng)?;
            let mut critic_dims = vec![layout.critic_input()];
            critic_dims.extend_from_slice(hidden);
            critic_dims.push(1);
            let critics = (0..algorithm.n_critics())
                .map(|_| Mlp::new(&critic_dims, Head::Identity, rng))
                .collect::<Result<Vec<_>>>()?;
            agents.push(AgentNets { target_actor: actor.clone(), target_critics: critics.clone(), actor, critics });
        }
        Ok(Self { agents, layout, algorithm, gamma: T::of(gamma) })
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn cast<U: Scalar>(&self) -> JointNets<U> {
        let cast_all = |v: &[Mlp<T>]| v.iter().map(Mlp::cast).collect::<Vec<_>>();
        JointNets {
            agents: self
                .agents
                .iter()
                .map(|a| AgentNets {
                    actor: a.actor.cast(),
                    critics: cast_all(&a.critics),
                    target_actor: a.target_actor.cast(),
                    target_critics: cast_all(&a.target_critics),
                })
                .collect(),
            layout: self.layout.clone(),
            algorithm: self.algorithm,
            gamma: U::of(self.gamma.f64()),
        }
    }

    /// Target-policy joint action at `next_obs`, optionally with smoothing noise.
    pub fn target_actions(&self, next_obs: &Array2<T>, noise: Option<&[Array2<T>]>) -> Result<Array2<T>> {
        let mut parts = Vec::with_capacity(self.n_agents());
        for (i, agent) in self.agents.iter().enumerate() {
            let o = next_obs.slice(s![.., self.layout.obs_range(i)]);
            let mut a = agent.target_actor.forward_view(o)?;
            if let Some(noise) = noise {
                a += &noise[i];
                let (lo, hi) = match self.layout.actions[i] {
                    ActionSpec::Discrete(_) => (T::zero(), T::one()),
                    ActionSpec::Continuous(_) => (-T::one(), T::one()),
                };
                a.mapv_inplace(|v| v.max(lo).min(hi));
            }
            parts.push(a);
        }
        let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
        Ok(concatenate(Axis(1), &views).expect("equal row counts"))
    }

    /// Bellman targets `r_i + gamma * Qbar_i(x', abar')` with the minimum over
    /// target critics when there are two.
    pub fn targets(&self, i: usize, batch: &Batch<T>) -> Result<Array2<T>> {
        let next = self.target_actions(&batch.next_obs, batch.target_noise.as_deref())?;
        let input = joint_input(batch.next_obs.view(), next.view());
        let mut q: Option<Array2<T>> = None;
        for critic in &self.agents[i].target_critics {
            let v = critic.forward(&input)?;
            q = Some(match q {
                None => v,
                Some(mut m) => {
                    m.zip_mut_with(&v, |a, &b| *a = a.min(b));
                    m
                }
            });
        }
        let q = q.expect("at least one critic");
        let r = batch.rewards.slice(s![.., i..i + 1]);
        Ok(&r + &(q * self.gamma))
    }

    /// Mean squared Bellman error of critic `k` of agent `i` and its gradient.
    pub fn critic_gradient(&self, i: usize, k: usize, batch: &Batch<T>, y: &Array2<T>) -> Result<(T, ParamVector<T>)> {
        let critic = &self.agents[i].critics[k];
        let input = joint_input(batch.obs.view(), batch.actions.view());
        let trace = critic.forward_trace(&input)?;
        check_len("bellman targets", y.nrows(), trace.output.nrows())?;
        let n = T::of(batch.len() as f64);
        let diff = &trace.output - y;
        let loss = diff.iter().map(|&d| d * d).sum::<T>() / n;
        let upstream = diff * (T::of(2.0) / n);
        Ok((loss, critic.backward(&trace, &upstream)?.params))
    }

    /// Batch-mean `Q_i` (first critic) with agent `i`'s action replaced by its
    /// policy output, and the gradient of its negation with respect to the actor.
    pub fn actor_gradient(&self, i: usize, batch: &Batch<T>) -> Result<(T, ParamVector<T>)> {
        let agent = &self.agents[i];
        let obs_i = batch.obs.slice(s![.., self.layout.obs_range(i)]).to_owned();
        let a_trace = agent.actor.forward_trace(&obs_i)?;
        let range = self.layout.act_range(i);
        let mut actions = batch.actions.clone();
        actions.slice_mut(s![.., range.clone()]).assign(&a_trace.output);
        let input = joint_input(batch.obs.view(), actions.view());
        let critic = &agent.critics[0];
        let q_trace = critic.forward_trace(&input)?;
        let n = T::of(batch.len() as f64);
        let objective = q_trace.output.sum() / n;
        let upstream = Array2::from_elem(q_trace.output.dim(), -T::one() / n);
        let dinput = critic.input_gradient(&q_trace, &upstream)?;
        let off = self.layout.total_obs();
        let da = dinput.slice(s![.., off + range.start..off + range.end]).to_owned();
        Ok((objective, agent.actor.backward(&a_trace, &da)?.params))
    }
}
