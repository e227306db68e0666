use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envs::EnvId;
use crate::error::{Error, Result};
use crate::marl::Algorithm;
use crate::nn::{read_checkpoint, write_checkpoint, Head, Mlp};
use crate::vi_marl::ViTrainer;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub agent: usize,
    /// `actor`, `critic<k>`, `target_actor`, `target_critic<k>`.
    pub role: String,
    /// One-based lookahead level for snapshot copies.
    pub level: Option<usize>,
    pub head: Head,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub env: EnvId,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub episode: u64,
    pub n_agents: usize,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingArtifact(path.clone()),
            _ => Error::Io(e),
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Writes every online, target and snapshot network plus a manifest.
pub fn write_checkpoint_dir(dir: &Path, env: EnvId, seed: u64, vt: &ViTrainer<f32>) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let nets = &vt.trainer.nets;
    let mut files = Vec::new();
    let mut put = |agent: usize, role: String, level: Option<usize>, net: &Mlp<f32>| -> Result<()> {
        let file = match level {
            None => format!("agent{agent}_{role}.bin"),
            Some(l) => format!("agent{agent}_{role}_la{l}.bin"),
        };
        write_checkpoint(&dir.join(&file), net)?;
        files.push(ManifestEntry { agent, role, level, head: net.head(), file });
        Ok(())
    };
    for (i, a) in nets.agents.iter().enumerate() {
        put(i, "actor".into(), None, &a.actor)?;
        put(i, "target_actor".into(), None, &a.target_actor)?;
        for (k, (c, t)) in a.critics.iter().zip(&a.target_critics).enumerate() {
            put(i, format!("critic{k}"), None, c)?;
            put(i, format!("target_critic{k}"), None, t)?;
        }
        if let Some(snap) = vt.snapshot() {
            let s = &snap.agents[i];
            for j in 0..s.actor.levels() {
                let actor = Mlp::from_params(a.actor.dims(), a.actor.head(), s.actor.level(j))?;
                put(i, "actor".into(), Some(j + 1), &actor)?;
                for (k, (c, cs)) in a.critics.iter().zip(&s.critics).enumerate() {
                    let critic = Mlp::from_params(c.dims(), c.head(), cs.level(j))?;
                    put(i, format!("critic{k}"), Some(j + 1), &critic)?;
                }
            }
        }
    }
    let manifest = Manifest {
        env,
        algorithm: nets.algorithm,
        seed,
        episode: vt.trainer.episodes(),
        n_agents: nets.n_agents(),
        files,
    };
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Loads the agents' networks with the given role (`level = None` for live weights).
pub fn load_role(dir: &Path, role: &str, level: Option<usize>) -> Result<(Manifest, Vec<Mlp<f32>>)> {
    let manifest = Manifest::load(dir)?;
    let mut nets = Vec::with_capacity(manifest.n_agents);
    for i in 0..manifest.n_agents {
        let entry = manifest
            .files
            .iter()
            .find(|e| e.agent == i && e.role == role && e.level == level)
            .ok_or_else(|| Error::MissingArtifact(dir.join(format!("agent{i}_{role}"))))?;
        nets.push(read_checkpoint(&dir.join(&entry.file), entry.head)?);
    }
    Ok((manifest, nets))
}

pub fn load_actors(dir: &Path) -> Result<(Manifest, Vec<Mlp<f32>>)> {
    load_role(dir, "actor", None)
}

/// `seed<k>` subdirectories of a run directory, sorted by seed.
pub fn seed_dirs(run_dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    if !run_dir.is_dir() {
        return Err(Error::MissingArtifact(run_dir.to_path_buf()));
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(run_dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(seed) = name.strip_prefix("seed").and_then(|s| s.parse::<u64>().ok()) {
            if entry.path().is_dir() {
                out.push((seed, entry.path()));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Final actors of every seed under a run directory, in seed order.
pub fn load_run_actors(run_dir: &Path) -> Result<Vec<(Manifest, Vec<Mlp<f32>>)>> {
    let seeds = seed_dirs(run_dir)?;
    if seeds.is_empty() {
        return Err(Error::MissingArtifact(run_dir.join("seed0")));
    }
    seeds.iter().map(|(_, d)| load_actors(&final_checkpoint(d))).collect()
}

/// Final checkpoint directory of one seed.
pub fn final_checkpoint(seed_dir: &Path) -> PathBuf {
    seed_dir.join("checkpoints").join("final")
}
