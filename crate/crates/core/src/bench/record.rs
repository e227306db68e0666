use std::path::Path;

use crate::error::{Error, Result};
use crate::vi_marl::HookEvent;

/// Metrics logged after one training episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRow {
    pub episode: u64,
    /// Undiscounted episode return per agent.
    pub rewards: Vec<f64>,
    /// Trailing 100-episode mean of `rewards`.
    pub reward_means: Vec<f64>,
    /// Squared distance of probe-averaged policies to the mixed equilibrium
    /// (matrix games only).
    pub distance: Option<f64>,
    pub critic_grad_norms: Vec<f64>,
    pub actor_grad_norms: Vec<f64>,
    /// Cumulative learn steps.
    pub learn_steps: u64,
}

/// Per-episode series of one training run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub n_agents: usize,
    pub rows: Vec<EpisodeRow>,
    pub events: Vec<HookEvent>,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn distances(&self) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.distance).collect()
    }

    pub fn final_distance(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.distance)
    }

    /// Distance after `episode` episodes (one-based).
    pub fn distance_at(&self, episode: u64) -> Option<f64> {
        let idx = usize::try_from(episode).ok()?.checked_sub(1)?;
        self.rows.get(idx).and_then(|r| r.distance)
    }

    pub fn header(n_agents: usize) -> Vec<String> {
        let per = |name: &'static str| (0..n_agents).map(move |i| format!("{name}_{i}"));
        let mut h = vec!["episode".to_string()];
        h.extend(per("reward"));
        h.extend(per("reward_mean"));
        h.push("distance".into());
        h.extend(per("critic_grad_norm"));
        h.extend(per("actor_grad_norm"));
        h.push("learn_steps".into());
        h
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(Self::header(self.n_agents))?;
        for r in &self.rows {
            let mut rec = vec![r.episode.to_string()];
            rec.extend(r.rewards.iter().chain(&r.reward_means).map(f64::to_string));
            rec.push(r.distance.map(|d| d.to_string()).unwrap_or_default());
            rec.extend(r.critic_grad_norms.iter().chain(&r.actor_grad_norms).map(f64::to_string));
            rec.push(r.learn_steps.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of [`RunRecord::write_csv`]; hook events are stored separately.
    pub fn read_csv(path: &Path, seed: u64) -> Result<Self> {
        let bad = |reason: String| Error::Format { path: path.to_path_buf(), reason };
        let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                Error::MissingArtifact(path.to_path_buf())
            }
            _ => Error::Csv(e),
        })?;
        let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
        if header.len() < 3 || !(header.len() - 3).is_multiple_of(4) {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let n = (header.len() - 3) / 4;
        if header != Self::header(n) {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let float = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let f: Vec<&str> = rec.iter().collect();
            let slice = |start: usize| -> Result<Vec<f64>> { f[start..start + n].iter().map(|s| float(s)).collect() };
            let d = f[1 + 2 * n];
            rows.push(EpisodeRow {
                episode: f[0].parse().map_err(|e| bad(format!("episode: {e}")))?,
                rewards: slice(1)?,
                reward_means: slice(1 + n)?,
                distance: if d.is_empty() { None } else { Some(float(d)?) },
                critic_grad_norms: slice(2 + 2 * n)?,
                actor_grad_norms: slice(2 + 3 * n)?,
                learn_steps: f[2 + 4 * n].parse().map_err(|e| bad(format!("learn_steps: {e}")))?,
            });
        }
        Ok(Self { seed, n_agents: n, rows, events: Vec::new() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_is_exact() {
        let rec = RunRecord {
            seed: 3,
            n_agents: 2,
            rows: (1..=3)
                .map(|e| EpisodeRow {
                    episode: e,
                    rewards: vec![0.1 * e as f64, -1.0 / 3.0],
                    reward_means: vec![std::f64::consts::PI, 1e-300],
                    distance: (e != 2).then_some(2.0 / 3.0),
                    critic_grad_norms: vec![1.5e7, 0.0],
                    actor_grad_norms: vec![f64::MIN_POSITIVE, 42.0],
                    learn_steps: e * 10,
                })
                .collect(),
            events: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("metrics.csv");
        rec.write_csv(&p).unwrap();
        assert_eq!(RunRecord::read_csv(&p, 3).unwrap(), rec);
        assert!(matches!(RunRecord::read_csv(&dir.path().join("none.csv"), 0), Err(Error::MissingArtifact(_))));
    }
}
