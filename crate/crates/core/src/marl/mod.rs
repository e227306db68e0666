//! Centralized-critic actor-critic training (MADDPG and MATD3).

mod agent;
mod buffer;
mod config;
mod explore;
mod trainer;

pub use agent::{AgentNets, JointNets, Layout};
pub use buffer::{Batch, BufferPolicy, ReplayBuffer, Transition};
pub use config::{Algorithm, TrainConfig};
pub use explore::{gumbel_max, select_action, Mode};
pub use trainer::{policy_output, target_gap, AgentOptim, EpisodeStats, GradNorms, Trainer};
