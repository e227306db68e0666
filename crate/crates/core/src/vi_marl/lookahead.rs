use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marl::JointNets;
use crate::nn::{la_average, Mlp, SnapshotStack};
use crate::Scalar;

/// Nested lookahead schedule. Periods count episodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LookaheadConfig {
    pub periods: Vec<u64>,
    #[serde(default = "half")]
    pub alpha_theta: f64,
    #[serde(default = "half")]
    pub alpha_w: f64,
    /// Reset base-optimizer moments after any averaging event.
    #[serde(default)]
    pub reset_optimizer: bool,
}

fn half() -> f64 {
    0.5
}

impl LookaheadConfig {
    pub fn new(periods: &[u64], alpha: f64) -> Self {
        Self { periods: periods.to_vec(), alpha_theta: alpha, alpha_w: alpha, reset_optimizer: false }
    }

    pub fn levels(&self) -> usize {
        self.periods.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.levels()) {
            return Err(Error::config(format!("lookahead supports 1 to 3 levels, got {}", self.levels())));
        }
        if self.periods.contains(&0) {
            return Err(Error::config("lookahead periods must be positive"));
        }
        for w in self.periods.windows(2) {
            if w[1] % w[0] != 0 || w[1] / w[0] < 2 {
                return Err(Error::config(format!(
                    "lookahead period {} must be an integer multiple (at least 2x) of {}",
                    w[1], w[0]
                )));
            }
        }
        for (name, a) in [("alpha_theta", self.alpha_theta), ("alpha_w", self.alpha_w)] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::config(format!("{name} must lie in [0, 1], got {a}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentSnapshot<T> {
    pub actor: SnapshotStack<T>,
    pub critics: Vec<SnapshotStack<T>>,
}

/// Lookahead copies of every online actor and critic. Targets are not tracked.
#[derive(Clone, Debug, PartialEq)]
pub struct JointSnapshot<T> {
    pub agents: Vec<AgentSnapshot<T>>,
}

impl<T: Scalar> JointSnapshot<T> {
    pub fn new(nets: &JointNets<T>, levels: usize) -> Self {
        Self {
            agents: nets
                .agents
                .iter()
                .map(|a| AgentSnapshot {
                    actor: SnapshotStack::new(&a.actor.params(), levels),
                    critics: a.critics.iter().map(|c| SnapshotStack::new(&c.params(), levels)).collect(),
                })
                .collect(),
        }
    }
}

/// One averaging event, as logged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HookEvent {
    pub episode: u64,
    /// One-based level.
    pub level: usize,
    pub alpha: f64,
    /// Joint norm of the change the averaging made to the live parameters.
    pub param_delta_norm: f64,
}

fn average_net<T: Scalar>(net: &mut Mlp<T>, stack: &mut SnapshotStack<T>, j: usize, alpha: T) -> Result<f64> {
    let live = net.params();
    let averaged = la_average(&live, stack.level(j), alpha)?;
    let delta = averaged.distance(&live);
    net.set_params(&averaged)?;
    stack.refresh_up_to(j, &averaged)?;
    Ok(delta)
}

/// Runs every level whose period divides `episode`, lowest level first.
///
/// Each network is averaged only against its own snapshot, so the result does
/// not depend on agent order.
pub fn nested_lookahead_hook<T: Scalar>(
    episode: u64,
    snapshot: &mut JointSnapshot<T>,
    nets: &mut JointNets<T>,
    cfg: &LookaheadConfig,
) -> Result<Vec<HookEvent>> {
    cfg.validate()?;
    if episode == 0 {
        return Err(Error::invalid("episodes are counted from 1"));
    }
    let (a_theta, a_w) = (T::of(cfg.alpha_theta), T::of(cfg.alpha_w));
    let mut events = Vec::new();
    for (j, &k) in cfg.periods.iter().enumerate() {
        if !episode.is_multiple_of(k) {
            continue;
        }
        let mut sq = 0.0;
        for (agent, snap) in nets.agents.iter_mut().zip(&mut snapshot.agents) {
            for (critic, stack) in agent.critics.iter_mut().zip(&mut snap.critics) {
                sq += average_net(critic, stack, j, a_w)?.powi(2);
            }
            sq += average_net(&mut agent.actor, &mut snap.actor, j, a_theta)?.powi(2);
        }
        events.push(HookEvent { episode, level: j + 1, alpha: cfg.alpha_theta, param_delta_norm: sq.sqrt() });
    }
    Ok(events)
}

pub fn write_hook_log(path: &std::path::Path, events: &[HookEvent]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if events.is_empty() {
        w.write_record(["episode", "level", "alpha", "param_delta_norm"])?;
    }
    for e in events {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_hook_log(path: &std::path::Path) -> Result<Vec<HookEvent>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{EnvId, MarkovGame};
    use crate::marl::{Algorithm, Layout};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nets(seed: u64) -> JointNets<f64> {
        let layout = Layout::new(EnvId::Rps.make().spec());
        JointNets::new(layout, Algorithm::Matd3, &[4], 0.95, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn perturb(n: &mut JointNets<f64>, by: f64) {
        for a in &mut n.agents {
            for net in a.critics.iter_mut().chain([&mut a.actor]) {
                let p: Vec<f64> = net.params().iter().map(|x| x + by).collect();
                net.set_params(&p).unwrap();
            }
        }
    }

    #[test]
    fn validation() {
        assert!(LookaheadConfig::new(&[10, 1000], 0.5).validate().is_ok());
        assert!(LookaheadConfig::new(&[10, 15], 0.5).validate().is_err());
        assert!(LookaheadConfig::new(&[10, 10], 0.5).validate().is_err());
        assert!(LookaheadConfig::new(&[], 0.5).validate().is_err());
        assert!(LookaheadConfig::new(&[1, 2, 4, 8], 0.5).validate().is_err());
        assert!(LookaheadConfig::new(&[5], 1.5).validate().is_err());
    }

    #[test]
    fn off_schedule_is_a_no_op() {
        let mut n = nets(0);
        let mut snap = JointSnapshot::new(&n, 2);
        perturb(&mut n, 0.1);
        let (n0, s0) = (n.clone(), snap.clone());
        let ev = nested_lookahead_hook(7, &mut snap, &mut n, &LookaheadConfig::new(&[10, 100], 0.5)).unwrap();
        assert!(ev.is_empty());
        assert_eq!(n, n0);
        assert_eq!(snap, s0);
    }

    #[test]
    fn two_levels_fire_in_order_and_sync_snapshots() {
        let mut n = nets(1);
        let mut snap = JointSnapshot::new(&n, 2);
        let targets = (n.agents[0].target_actor.clone(), n.agents[1].target_critics.clone());
        perturb(&mut n, 0.2);
        let ev = nested_lookahead_hook(1000, &mut snap, &mut n, &LookaheadConfig::new(&[10, 1000], 0.5)).unwrap();
        assert_eq!(ev.iter().map(|e| e.level).collect::<Vec<_>>(), vec![1, 2]);
        for (a, s) in n.agents.iter().zip(&snap.agents) {
            for j in 0..2 {
                assert_eq!(s.actor.level(j), &a.actor.params());
                for (c, cs) in a.critics.iter().zip(&s.critics) {
                    assert_eq!(cs.level(j), &c.params());
                }
            }
        }
        // Both events averaged toward the same initial snapshot: 0.2 -> 0.1 -> 0.05.
        let first = ev[0].param_delta_norm;
        assert!((ev[1].param_delta_norm - first / 2.0).abs() < 1e-9);
        assert_eq!(n.agents[0].target_actor, targets.0);
        assert_eq!(n.agents[1].target_critics, targets.1);
    }

    #[test]
    fn unit_alpha_only_refreshes_snapshots() {
        let mut n = nets(2);
        let mut snap = JointSnapshot::new(&n, 1);
        perturb(&mut n, 0.3);
        let before = n.clone();
        let ev = nested_lookahead_hook(1, &mut snap, &mut n, &LookaheadConfig::new(&[1], 1.0)).unwrap();
        assert_eq!(n, before);
        assert_eq!(ev[0].param_delta_norm, 0.0);
        assert_eq!(snap.agents[0].actor.level(0), &n.agents[0].actor.params());
    }

    #[test]
    fn zero_alpha_resets_to_snapshot() {
        let mut n = nets(3);
        let start = n.clone();
        let mut snap = JointSnapshot::new(&n, 1);
        perturb(&mut n, 0.3);
        nested_lookahead_hook(5, &mut snap, &mut n, &LookaheadConfig::new(&[5], 0.0)).unwrap();
        assert_eq!(n, start);
    }

    #[test]
    fn hook_log_roundtrip() {
        let events = vec![
            HookEvent { episode: 10, level: 1, alpha: 0.5, param_delta_norm: 0.125 },
            HookEvent { episode: 1000, level: 2, alpha: 0.5, param_delta_norm: 1.0 / 3.0 },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("hooks.csv");
        write_hook_log(&p, &events).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("episode,level,alpha,param_delta_norm\n"));
        assert_eq!(read_hook_log(&p).unwrap(), events);
    }
}
