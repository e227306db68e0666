use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::artifacts::write_checkpoint_dir;
use super::config::ExperimentConfig;
use super::metrics::{distance_to_mne, equilibrium, probe_policies, RUNNING_WINDOW};
use super::record::{EpisodeRow, RunRecord};
use crate::envs::MarkovGame;
use crate::error::Result;
use crate::marl::Trainer;
use crate::vi_marl::{write_hook_log, ViTrainer};

pub struct SeedRun {
    pub record: RunRecord,
    pub trainer: ViTrainer<f32>,
}

/// One seed's full training run. With `out`, writes `metrics.csv`,
/// `hooks.csv` and periodic checkpoints under it.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64, out: Option<&Path>) -> Result<SeedRun> {
    cfg.validate()?;
    let mut env = cfg.env.make();
    let trainer = Trainer::new(env.spec(), cfg.algorithm, cfg.train.clone(), seed)?;
    let mut vt = ViTrainer::new(trainer, cfg.wrapper.base(), cfg.wrapper.lookahead_config(cfg.env))?;
    let eq = equilibrium(cfg.env);
    let n = env.spec().n_agents;
    let episodes = cfg.episodes();
    let mut returns: Vec<Vec<f64>> = vec![Vec::with_capacity(episodes as usize); n];
    let mut rows = Vec::with_capacity(episodes as usize);
    let mut lr = cfg.train.lr;
    for e in 1..=episodes {
        let stats = vt.run_episode(&mut env)?;
        for (series, r) in returns.iter_mut().zip(&stats.rewards) {
            series.push(*r);
        }
        let distance = match &eq {
            Some(eq) => {
                let probes = probe_policies(vt.trainer.nets.agents.iter().map(|a| &a.actor))?;
                Some(distance_to_mne(&probes, eq)?)
            }
            None => None,
        };
        let norms = &vt.trainer.grad_norms;
        rows.push(EpisodeRow {
            episode: e,
            reward_means: returns
                .iter()
                .map(|s| {
                    let tail = &s[s.len().saturating_sub(RUNNING_WINDOW)..];
                    tail.iter().sum::<f64>() / tail.len() as f64
                })
                .collect(),
            rewards: stats.rewards,
            distance,
            critic_grad_norms: norms.critic.clone(),
            actor_grad_norms: norms.actor.clone(),
            learn_steps: vt.trainer.learn_steps(),
        });
        let mut changed = false;
        for ev in cfg.lr_schedule.iter().filter(|ev| ev.episode == e) {
            lr *= ev.factor;
            changed = true;
        }
        if changed {
            vt.set_lr(lr);
        }
        if let Some(out) = out {
            if e % cfg.checkpoint_every == 0 {
                write_checkpoint_dir(&out.join("checkpoints").join(format!("ep{e}")), cfg.env, seed, &vt)?;
            }
        }
    }
    let record = RunRecord { seed, n_agents: n, rows, events: vt.events.clone() };
    if let Some(out) = out {
        fs::create_dir_all(out)?;
        record.write_csv(&out.join("metrics.csv"))?;
        write_hook_log(&out.join("hooks.csv"), &record.events)?;
        write_checkpoint_dir(&out.join("checkpoints").join("final"), cfg.env, seed, &vt)?;
    }
    Ok(SeedRun { record, trainer: vt })
}

/// All seeds in parallel, records in seed order. Nothing is written to disk.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    cfg.seeds.par_iter().map(|&s| run_seed(cfg, s, None).map(|r| r.record)).collect()
}

/// Like [`run_experiment`], writing artifacts under `<out>/<run name>/`.
pub fn run_experiment_to(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let run_dir = out.join(cfg.run_name());
    fs::create_dir_all(&run_dir)?;
    fs::write(run_dir.join("config.toml"), cfg.to_toml())?;
    let records: Vec<RunRecord> = cfg
        .seeds
        .par_iter()
        .map(|&s| run_seed(cfg, s, Some(&run_dir.join(format!("seed{s}")))).map(|r| r.record))
        .collect::<Result<_>>()?;
    write_summary(&run_dir.join("summary.csv"), &records)?;
    super::plot::emit_plots(&[(cfg.wrapper.kind.to_string(), records.clone())], &run_dir.join("plots"))?;
    Ok(records)
}

/// One line per seed with final-episode metrics.
pub fn write_summary(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let n = records.first().map_or(0, |r| r.n_agents);
    let mut header = vec!["seed".to_string(), "episodes".into(), "learn_steps".into(), "final_distance".into()];
    header.extend((0..n).map(|i| format!("final_reward_mean_{i}")));
    w.write_record(&header)?;
    for r in records {
        let last = r.rows.last();
        let mut rec = vec![
            r.seed.to_string(),
            r.len().to_string(),
            last.map_or(0, |l| l.learn_steps).to_string(),
            r.final_distance().map(|d| d.to_string()).unwrap_or_default(),
        ];
        rec.extend(last.map(|l| l.reward_means.iter().map(f64::to_string).collect::<Vec<_>>()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
