//! Variational-inequality optimization for multi-agent actor-critic learning.
//!
//! The crate is layered bottom-up:
//!
//! - [`vi_core`]: analytic vector fields (bilinear games, softmax matrix games)
//!   and first-order VI solvers (GD, extragradient, optimistic GD, nested lookahead).
//! - [`nn`]: small MLPs with hand-derived gradients, Adam, soft/lookahead averaging
//!   and a portable checkpoint format.
//! - [`envs`]: Markov games (rock-paper-scissors, matching pennies, predator-prey,
//!   physical deception).
//! - [`marl`]: MADDPG and MATD3 trainers with a replay buffer.
//! - [`vi_marl`]: nested lookahead and extragradient wrappers over the trainers.
//! - [`bench`]: multi-seed experiment runner, evaluation protocols, CSV and SVG output.

pub mod bench;
pub mod envs;
pub mod error;
pub mod marl;
pub mod nn;
pub mod rng;
pub mod scalar;
pub mod vi_core;
pub mod vi_marl;

pub use error::{Error, Result};
pub use scalar::Scalar;
