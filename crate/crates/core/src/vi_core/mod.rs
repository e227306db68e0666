//! Analytic variational-inequality problems and first-order solvers.
//!
//! Everything here is 64-bit and deterministic. The fields are small enough
//! that closed-form recurrences can be checked to near machine precision.

mod field;
mod games;
mod probe;
mod solver;
mod trajectory;

pub use field::VectorField;
pub use games::{matrix_game_field, softmax, softmax_jacobian_apply, BilinearGame, SoftmaxMatrixGame};
pub use probe::{
    jacobian_probe, monotonicity_probe, uniform_sampler, JacobianReport, MonotonicityReport, DEFAULT_PROBE_PAIRS,
    EIGEN_MAX_DIM,
};
pub use solver::{eg_step, gd_step, la_solve, ogd_step, solve, BaseMethod, Method, SolverConfig};
pub use trajectory::Trajectory;
