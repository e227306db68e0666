//! Feed-forward networks with exact reverse-mode gradients.
//!
//! Parameters flatten into a [`ParamVector`] in a fixed layout: layer by layer,
//! each layer's weight matrix (shape `in x out`, row-major) followed by its bias.

mod adam;
mod checkpoint;
mod mlp;
mod params;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use mlp::{Gradients, Head, Mlp, Trace};
pub use params::{la_average, soft_update, ParamVector, SnapshotStack};
