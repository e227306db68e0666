//! Variational-inequality optimizers layered over the actor-critic trainers:
//! nested lookahead across episodes, joint extragradient learn steps, and
//! their composition.
//!
//! The joint operator of a centralized-critic method stacks, per agent, the
//! Bellman-error gradient of each critic and the negated policy gradient of
//! the actor. For MATD3 both critics regress to the clipped double-Q target
//! and only the first critic drives the actor.

mod extragradient;
mod lookahead;
mod operator;
mod trainer;

pub use extragradient::{eg_learn_step, BlockOptimizer, FieldProblem, JointProblem, MarlProblem};
pub use lookahead::{
    nested_lookahead_hook, read_hook_log, write_hook_log, AgentSnapshot, HookEvent, JointSnapshot, LookaheadConfig,
};
pub use operator::{joint_point, operator_view};
pub use trainer::{BaseOptimizer, ViTrainer};
