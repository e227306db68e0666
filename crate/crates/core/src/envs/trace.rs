use std::path::Path;

use super::{Action, Env, MarkovGame};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum TraceRow {
    Matrix { step: usize, actions: [usize; 2], rewards: [f64; 2] },
    Particle { step: usize, agent: usize, pos: [f64; 2], vel: [f64; 2], action: Vec<f64>, reward: f64 },
}

/// Plays one episode from `seed` and records every step.
pub fn record_trace(
    env: &mut Env,
    seed: u64,
    policy: &mut dyn FnMut(&[Vec<f64>]) -> Vec<Action>,
) -> Result<Vec<TraceRow>> {
    let mut obs = env.reset(seed);
    let mut rows = Vec::new();
    loop {
        let actions = policy(&obs);
        let step = env.step(&actions)?;
        let t = env.time();
        match &*env {
            Env::Matrix(_) => {
                let idx = |a: &Action| match a {
                    Action::Discrete(k) => *k,
                    Action::Continuous(_) => unreachable!("validated by step"),
                };
                rows.push(TraceRow::Matrix {
                    step: t,
                    actions: [idx(&actions[0]), idx(&actions[1])],
                    rewards: [step.rewards[0], step.rewards[1]],
                });
            }
            Env::Particle(w) => {
                for (i, (e, a)) in w.agents().iter().zip(&actions).enumerate() {
                    let action = match a {
                        Action::Continuous(v) => v.clone(),
                        Action::Discrete(k) => vec![*k as f64],
                    };
                    rows.push(TraceRow::Particle {
                        step: t,
                        agent: i,
                        pos: e.pos,
                        vel: e.vel,
                        action,
                        reward: step.rewards[i],
                    });
                }
            }
        }
        obs = step.observations;
        if step.done {
            break;
        }
    }
    Ok(rows)
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    match rows.first() {
        None => return Err(Error::invalid("empty trace")),
        Some(TraceRow::Matrix { .. }) => w.write_record(["step", "a1", "a2", "r1", "r2"])?,
        Some(TraceRow::Particle { action, .. }) => {
            let mut header: Vec<String> =
                ["step", "agent", "pos_x", "pos_y", "vel_x", "vel_y"].map(String::from).to_vec();
            header.extend((0..action.len()).map(|k| format!("action_{k}")));
            header.push("reward".into());
            w.write_record(&header)?;
        }
    }
    for row in rows {
        let record: Vec<String> = match row {
            TraceRow::Matrix { step, actions, rewards } => vec![
                step.to_string(),
                actions[0].to_string(),
                actions[1].to_string(),
                rewards[0].to_string(),
                rewards[1].to_string(),
            ],
            TraceRow::Particle { step, agent, pos, vel, action, reward } => {
                let mut r = vec![step.to_string(), agent.to_string()];
                r.extend(pos.iter().chain(vel).chain(action).map(f64::to_string));
                r.push(reward.to_string());
                r
            }
        };
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
