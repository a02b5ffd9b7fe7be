pub mod diagnostics;
pub mod error;
mod exec;
pub mod geometry;
pub mod harness;
pub mod graph;
pub mod rng;
pub mod serial;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
