//! The two iteration engines and the run loop.

mod config;
mod problem;
mod prox;
mod run;
mod step;

pub use config::{default_step_size, step_size_bound, Delta, SolverConfig};
pub use problem::{ConvexOracle, LocalObjective, ProblemInstance};
pub use prox::{solve_local_prox, LocalProx, PROX_MAX_ITERS, PROX_TOLERANCE};
pub use run::{run, run_with, RunOptions, RunTrace};
pub use step::{
    bregman_pdmm_step, dual_residual_vector, initial_primal, pdmm_step, IterateState, Variant,
};

pub(crate) use problem::dot;
pub(crate) use step::disagreement;
