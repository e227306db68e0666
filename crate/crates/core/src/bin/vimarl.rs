use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vimarl::bench::{
    checkpoint_distance, cross_play_matrix, emit_plots, evaluate_win_rate, final_checkpoint, load_actors,
    load_run_actors, run_experiment_to, seed_dirs, ActorPolicy, ExperimentConfig, Manifest, RunRecord, Summary,
    MANIFEST, REFERENCE_WIN_RATES,
};
use vimarl::envs::{EnvId, MarkovGame, ParticleWorld, Scenario};
use vimarl::nn::Mlp;
use vimarl::{Error, Result};

#[derive(Parser)]
#[command(name = "vimarl", version, about = "Train and evaluate VI-wrapped MADDPG/MATD3 agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Train this single seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        episodes: Option<u64>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Evaluate trained checkpoints.
    Eval {
        /// A run directory (with seed<k>/ subdirectories) or one checkpoint directory.
        #[arg(long)]
        checkpoints: PathBuf,
        #[arg(long, value_enum)]
        mode: EvalMode,
        /// Second method's run directory, for cross-play.
        #[arg(long)]
        opponent: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        test_envs: usize,
        /// Sample actions instead of acting greedily.
        #[arg(long)]
        stochastic: bool,
        /// Also write the results as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Redraw plots from metrics.csv files.
    Plot {
        /// A run directory, or a directory of run directories (one curve each).
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalMode {
    Winrate,
    Crossplay,
    Distance,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::MissingArtifact(_) => 3,
                _ => 1,
            })
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, seed, episodes, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            if episodes.is_some() {
                cfg.episodes = episodes;
            }
            cfg.validate()?;
            let records = run_experiment_to(&cfg, &out)?;
            println!("wrote {}", out.join(cfg.run_name()).display());
            for r in &records {
                let last = r.rows.last();
                println!(
                    "seed {}: {} episodes, {} learn steps{}",
                    r.seed,
                    r.len(),
                    last.map_or(0, |l| l.learn_steps),
                    r.final_distance().map(|d| format!(", final distance {d:.6}")).unwrap_or_default()
                );
            }
            Ok(())
        }
        Command::Eval { checkpoints, mode, opponent, test_envs, stochastic, out } => {
            let rows = evaluate(&checkpoints, mode, opponent.as_deref(), test_envs, stochastic)?;
            for (label, s) in &rows {
                println!("{label}: {:.4} ± {:.4}  per seed {:?}", s.mean, s.std, s.per_seed);
            }
            if let Some(path) = out {
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(["label", "mean", "std", "per_seed"])?;
                for (label, s) in &rows {
                    let per: Vec<String> = s.per_seed.iter().map(f64::to_string).collect();
                    w.write_record([label.clone(), s.mean.to_string(), s.std.to_string(), per.join(";")])?;
                }
                w.flush()?;
            }
            Ok(())
        }
        Command::Plot { records, out } => {
            let groups = collect_records(&records)?;
            let out = out.unwrap_or_else(|| records.join("plots"));
            for p in emit_plots(&groups, &out)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

/// Final actors per seed from a run directory, or the single checkpoint itself.
fn load_teams(dir: &Path) -> Result<Vec<(Manifest, Vec<Mlp<f32>>)>> {
    if dir.join(MANIFEST).is_file() {
        Ok(vec![load_actors(dir)?])
    } else {
        load_run_actors(dir)
    }
}

fn checkpoint_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.join(MANIFEST).is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let seeds = seed_dirs(dir)?;
    if seeds.is_empty() {
        return Err(Error::MissingArtifact(dir.join("seed0")));
    }
    Ok(seeds.iter().map(|(_, d)| final_checkpoint(d)).collect())
}

fn label(dir: &Path) -> String {
    dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn evaluate(
    dir: &Path,
    mode: EvalMode,
    opponent: Option<&Path>,
    test_envs: usize,
    stochastic: bool,
) -> Result<Vec<(String, Summary)>> {
    match mode {
        EvalMode::Distance => {
            let values = checkpoint_dirs(dir)?.iter().map(|d| checkpoint_distance(d)).collect::<Result<_>>()?;
            Ok(vec![("distance".into(), Summary::from_values(values))])
        }
        EvalMode::Winrate => {
            let teams = load_teams(dir)?;
            let specs = ParticleWorld::new(Scenario::PhysicalDeception).spec().actions.clone();
            let mut policies = Vec::with_capacity(teams.len());
            for (m, actors) in teams {
                if m.env != EnvId::PhysicalDeception {
                    return Err(Error::Config(format!("win rate needs physical_deception checkpoints, got {}", m.env)));
                }
                policies.push(ActorPolicy::new(actors, &specs, stochastic, m.seed)?);
            }
            let mut closures: Vec<_> = policies.iter_mut().map(|p| move |o: &[Vec<f64>]| p.act(o)).collect();
            let mut refs: Vec<&mut vimarl::bench::Policy> =
                closures.iter_mut().map(|c| c as &mut vimarl::bench::Policy).collect();
            let s = evaluate_win_rate(&mut refs, test_envs)?;
            let mut rows = vec![("win_rate".to_string(), s)];
            for (name, mean, std) in REFERENCE_WIN_RATES {
                rows.push((format!("reference {name}"), Summary { per_seed: vec![], mean, std }));
            }
            Ok(rows)
        }
        EvalMode::Crossplay => {
            let other = opponent.ok_or_else(|| Error::Config("crossplay needs --opponent".into()))?;
            let a = load_teams(dir)?;
            let b = load_teams(other)?;
            let env = a[0].0.env;
            let scenario = match env {
                EnvId::PredatorPrey => Scenario::PredatorPrey,
                EnvId::PhysicalDeception => Scenario::PhysicalDeception,
                _ => return Err(Error::Config(format!("cross-play needs a particle scenario, got {env}"))),
            };
            if b.iter().chain(&a).any(|(m, _)| m.env != env) {
                return Err(Error::Config("cross-play checkpoints come from different environments".into()));
            }
            let ta: Vec<_> = a.into_iter().map(|(_, n)| n).collect();
            let tb: Vec<_> = b.into_iter().map(|(_, n)| n).collect();
            let n = ta.len().min(tb.len());
            cross_play_matrix(scenario, (&label(dir), &ta[..n]), (&label(other), &tb[..n]), test_envs, stochastic)
        }
    }
}

fn records_in(run_dir: &Path) -> Result<Vec<RunRecord>> {
    seed_dirs(run_dir)?
        .into_iter()
        .filter(|(_, d)| d.join("metrics.csv").is_file())
        .map(|(s, d)| RunRecord::read_csv(&d.join("metrics.csv"), s))
        .collect()
}

fn collect_records(dir: &Path) -> Result<Vec<(String, Vec<RunRecord>)>> {
    let own = records_in(dir)?;
    let mut groups = Vec::new();
    if !own.is_empty() {
        groups.push((label(dir), own));
    } else {
        let mut subs: Vec<PathBuf> =
            std::fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
        subs.sort();
        for sub in subs {
            let recs = records_in(&sub)?;
            if !recs.is_empty() {
                groups.push((label(&sub), recs));
            }
        }
    }
    if groups.is_empty() {
        return Err(Error::MissingArtifact(dir.join("seed0").join("metrics.csv")));
    }
    Ok(groups)
}
