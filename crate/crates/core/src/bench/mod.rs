//! Experiment runner, evaluation protocols and result files.

mod artifacts;
mod config;
mod eval;
mod metrics;
mod plot;
mod record;
mod runner;

pub use artifacts::{
    final_checkpoint, load_actors, load_role, load_run_actors, seed_dirs, write_checkpoint_dir, Manifest,
    ManifestEntry, MANIFEST,
};
pub use config::{
    default_episodes, default_periods, EvalConfig, ExperimentConfig, LrEvent, WrapperConfig, WrapperKind,
};
pub use eval::{
    adversary_reward_episode, checkpoint_distance, cross_play, cross_play_matrix, evaluate_win_rate, test_env_seeds,
    win_rate_episode, ActorPolicy, Policy, Summary, REFERENCE_WIN_RATES,
};
pub use metrics::{distance_to_mne, equilibrium, mean_std, probe_policies, running_mean, RUNNING_WINDOW};
pub use plot::{band, emit_plots, render_svg, Band, Curve};
pub use record::{EpisodeRow, RunRecord};
pub use runner::{run_experiment, run_experiment_to, run_seed, write_summary, SeedRun};
