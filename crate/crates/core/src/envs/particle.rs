use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_actions, Action, ActionSpec, GameSpec, MarkovGame, Step, EPISODE_LENGTH, GAMMA};
use crate::error::Result;

const DT: f64 = 0.1;
const DAMPING: f64 = 0.25;
const CONTACT_FORCE: f64 = 1e2;
const CONTACT_MARGIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Two adversaries chase one faster prey around two obstacles.
    PredatorPrey,
    /// Two good agents cover a hidden target landmark; one adversary must guess it.
    PhysicalDeception,
}

impl Scenario {
    fn counts(self) -> (usize, usize, usize) {
        // (adversaries, good agents, landmarks)
        match self {
            Scenario::PredatorPrey => (2, 1, 2),
            Scenario::PhysicalDeception => (1, 2, 2),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entity {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub size: f64,
    pub accel: f64,
    pub max_speed: Option<f64>,
    pub movable: bool,
    pub collide: bool,
    pub adversary: bool,
}

/// 2-D point-mass world. Agents come first (adversaries before good agents),
/// then landmarks.
#[derive(Clone, Debug)]
pub struct ParticleWorld {
    scenario: Scenario,
    entities: Vec<Entity>,
    n_adv: usize,
    n_agents: usize,
    /// Target landmark (physical deception only).
    goal: usize,
    spec: GameSpec,
    t: usize,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Out-of-bounds penalty for the prey, summed over coordinates.
pub fn prey_bound_penalty(pos: [f64; 2]) -> f64 {
    pos.iter()
        .map(|c| {
            let x = c.abs();
            if x < 0.9 {
                0.0
            } else if x < 1.0 {
                (x - 0.9) * 10.0
            } else {
                (2.0 * x - 2.0).exp().min(10.0)
            }
        })
        .sum()
}

impl ParticleWorld {
    pub fn new(scenario: Scenario) -> Self {
        let (n_adv, n_good, n_land) = scenario.counts();
        let agent = |adversary: bool| match scenario {
            Scenario::PredatorPrey => Entity {
                pos: [0.0; 2],
                vel: [0.0; 2],
                size: if adversary { 0.075 } else { 0.05 },
                accel: if adversary { 3.0 } else { 4.0 },
                max_speed: Some(if adversary { 1.0 } else { 1.3 }),
                movable: true,
                collide: true,
                adversary,
            },
            Scenario::PhysicalDeception => Entity {
                pos: [0.0; 2],
                vel: [0.0; 2],
                size: 0.15,
                accel: 5.0,
                max_speed: None,
                movable: true,
                collide: false,
                adversary,
            },
        };
        let landmark = Entity {
            pos: [0.0; 2],
            vel: [0.0; 2],
            size: match scenario {
                Scenario::PredatorPrey => 0.2,
                Scenario::PhysicalDeception => 0.08,
            },
            accel: 0.0,
            max_speed: None,
            movable: false,
            collide: scenario == Scenario::PredatorPrey,
            adversary: false,
        };
        let mut entities: Vec<Entity> = (0..n_adv).map(|_| agent(true)).collect();
        entities.extend((0..n_good).map(|_| agent(false)));
        entities.extend((0..n_land).map(|_| landmark.clone()));
        let n_agents = n_adv + n_good;
        let mut world = Self {
            scenario,
            entities,
            n_adv,
            n_agents,
            goal: 0,
            spec: GameSpec {
                n_agents,
                obs_dims: vec![],
                actions: vec![ActionSpec::Continuous(2); n_agents],
                episode_length: EPISODE_LENGTH,
                gamma: GAMMA,
            },
            t: 0,
        };
        world.spec.obs_dims = world.observations().iter().map(Vec::len).collect();
        world
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn agents(&self) -> &[Entity] {
        &self.entities[..self.n_agents]
    }

    pub fn landmarks(&self) -> &[Entity] {
        &self.entities[self.n_agents..]
    }

    pub fn n_adversaries(&self) -> usize {
        self.n_adv
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    /// Places entities by hand, e.g. for scripted checks.
    pub fn set_positions(&mut self, agents: &[[f64; 2]], landmarks: &[[f64; 2]], goal: usize) {
        for (e, p) in self.entities[..self.n_agents].iter_mut().zip(agents) {
            e.pos = *p;
            e.vel = [0.0; 2];
        }
        for (e, p) in self.entities[self.n_agents..].iter_mut().zip(landmarks) {
            e.pos = *p;
        }
        self.goal = goal;
    }

    fn goal_pos(&self) -> [f64; 2] {
        self.entities[self.n_agents + self.goal].pos
    }

    /// Adversary outcome at the current state: 1 if strictly closer to the
    /// target than the nearest good agent, 0 if strictly farther, 0.5 on a tie.
    pub fn adversary_outcome(&self) -> f64 {
        let goal = self.goal_pos();
        let adv = self.agents()[..self.n_adv].iter().map(|a| dist(a.pos, goal)).fold(f64::INFINITY, f64::min);
        let good = self.agents()[self.n_adv..].iter().map(|a| dist(a.pos, goal)).fold(f64::INFINITY, f64::min);
        if adv < good {
            1.0
        } else if adv > good {
            0.0
        } else {
            0.5
        }
    }

    fn is_collision(a: &Entity, b: &Entity) -> bool {
        dist(a.pos, b.pos) < a.size + b.size
    }

    fn physics(&mut self, actions: &[[f64; 2]]) {
        let n = self.entities.len();
        let mut force = vec![[0.0f64; 2]; n];
        for (i, u) in actions.iter().enumerate() {
            let accel = self.entities[i].accel;
            force[i] = [u[0] * accel, u[1] * accel];
        }
        for a in 0..n {
            for b in a + 1..n {
                let (ea, eb) = (&self.entities[a], &self.entities[b]);
                if !(ea.collide && eb.collide) || !(ea.movable || eb.movable) {
                    continue;
                }
                let delta = [ea.pos[0] - eb.pos[0], ea.pos[1] - eb.pos[1]];
                let d = delta[0].hypot(delta[1]);
                if d < 1e-12 {
                    continue;
                }
                let pen = CONTACT_MARGIN * softplus(-(d - (ea.size + eb.size)) / CONTACT_MARGIN);
                let f = [CONTACT_FORCE * delta[0] / d * pen, CONTACT_FORCE * delta[1] / d * pen];
                let (ma, mb) = (ea.movable, eb.movable);
                if ma {
                    force[a][0] += f[0];
                    force[a][1] += f[1];
                }
                if mb {
                    force[b][0] -= f[0];
                    force[b][1] -= f[1];
                }
            }
        }
        for (e, f) in self.entities.iter_mut().zip(&force) {
            if !e.movable {
                continue;
            }
            for (v, fk) in e.vel.iter_mut().zip(f) {
                *v = *v * (1.0 - DAMPING) + fk * DT;
            }
            if let Some(cap) = e.max_speed {
                let speed = e.vel[0].hypot(e.vel[1]);
                if speed > cap {
                    e.vel = [e.vel[0] / speed * cap, e.vel[1] / speed * cap];
                }
            }
            e.pos = [e.pos[0] + e.vel[0] * DT, e.pos[1] + e.vel[1] * DT];
        }
    }

    pub fn rewards(&self) -> Vec<f64> {
        match self.scenario {
            Scenario::PredatorPrey => self.tag_rewards(),
            Scenario::PhysicalDeception => self.deception_rewards(),
        }
    }

    fn tag_rewards(&self) -> Vec<f64> {
        let (adv, good) = self.agents().split_at(self.n_adv);
        let mut out = Vec::with_capacity(self.n_agents);
        // Adversaries share the distance shaping (to the nearest prey) and collision bonus.
        let mut adv_rew = 0.0;
        for a in adv {
            adv_rew -= 0.1 * good.iter().map(|g| dist(a.pos, g.pos)).fold(f64::INFINITY, f64::min);
        }
        for g in good {
            adv_rew += 10.0 * adv.iter().filter(|a| Self::is_collision(a, g)).count() as f64;
        }
        out.extend(std::iter::repeat_n(adv_rew, adv.len()));
        for g in good {
            let mut r = 0.1 * adv.iter().map(|a| dist(a.pos, g.pos)).sum::<f64>();
            r -= 10.0 * adv.iter().filter(|a| Self::is_collision(a, g)).count() as f64;
            r -= prey_bound_penalty(g.pos);
            out.push(r);
        }
        out
    }

    fn deception_rewards(&self) -> Vec<f64> {
        let goal = self.goal_pos();
        let (adv, good) = self.agents().split_at(self.n_adv);
        let adv_dist: f64 = adv.iter().map(|a| dist(a.pos, goal)).sum();
        let nearest_good = good.iter().map(|g| dist(g.pos, goal)).fold(f64::INFINITY, f64::min);
        let mut out: Vec<f64> = adv.iter().map(|a| -dist(a.pos, goal)).collect();
        out.extend(std::iter::repeat_n(adv_dist - nearest_good, good.len()));
        out
    }

    fn agent_observation(&self, i: usize) -> Vec<f64> {
        let me = &self.entities[i];
        let rel = |p: [f64; 2]| [p[0] - me.pos[0], p[1] - me.pos[1]];
        let mut obs = Vec::with_capacity(16);
        match self.scenario {
            Scenario::PredatorPrey => {
                obs.extend(me.vel);
                obs.extend(me.pos);
                for l in self.landmarks() {
                    obs.extend(rel(l.pos));
                }
                for (j, o) in self.agents().iter().enumerate() {
                    if j != i {
                        obs.extend(rel(o.pos));
                    }
                }
                for (j, o) in self.agents().iter().enumerate() {
                    if j != i && !o.adversary {
                        obs.extend(o.vel);
                    }
                }
            }
            Scenario::PhysicalDeception => {
                if !me.adversary {
                    obs.extend(rel(self.goal_pos()));
                }
                for l in self.landmarks() {
                    obs.extend(rel(l.pos));
                }
                for (j, o) in self.agents().iter().enumerate() {
                    if j != i {
                        obs.extend(rel(o.pos));
                    }
                }
            }
        }
        obs
    }
}

impl MarkovGame for ParticleWorld {
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let landmark_bound = match self.scenario {
            Scenario::PredatorPrey => 0.9,
            Scenario::PhysicalDeception => 1.0,
        };
        let n_agents = self.n_agents;
        for (i, e) in self.entities.iter_mut().enumerate() {
            let b = if i < n_agents { 1.0 } else { landmark_bound };
            e.pos = [rng.random_range(-b..=b), rng.random_range(-b..=b)];
            e.vel = [0.0; 2];
        }
        let n_land = self.entities.len() - n_agents;
        self.goal = rng.random_range(0..n_land);
        self.t = 0;
        self.observations()
    }

    fn step(&mut self, actions: &[Action]) -> Result<Step> {
        check_actions(&self.spec, actions)?;
        let clipped: Vec<[f64; 2]> = actions
            .iter()
            .map(|a| match a {
                Action::Continuous(v) => {
                    let c = |x: f64| if x.is_nan() { 0.0 } else { x.clamp(-1.0, 1.0) };
                    [c(v[0]), c(v[1])]
                }
                Action::Discrete(_) => unreachable!("checked"),
            })
            .collect();
        self.physics(&clipped);
        self.t += 1;
        Ok(Step {
            observations: self.observations(),
            rewards: self.rewards(),
            done: self.t >= self.spec.episode_length,
        })
    }

    fn state(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(4 * self.entities.len() + 1);
        for e in &self.entities {
            s.extend(e.pos);
            s.extend(e.vel);
        }
        if self.scenario == Scenario::PhysicalDeception {
            s.push(self.goal as f64);
        }
        s
    }

    fn observations(&self) -> Vec<Vec<f64>> {
        (0..self.n_agents).map(|i| self.agent_observation(i)).collect()
    }

    fn time(&self) -> usize {
        self.t
    }
}
