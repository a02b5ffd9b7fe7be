use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// How per-vertex block updates are scheduled. Both modes give bitwise
/// identical results: each block is computed by the same code on the same
/// inputs, and blocks never read each other's outputs within a phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    #[default]
    Serial,
    Parallel,
}

pub(crate) fn try_for_each_block<F>(exec: Execution, data: &mut [f64], n: usize, f: F) -> Result<()>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Sync + Send,
{
    if n == 0 {
        return Ok(());
    }
    match exec {
        Execution::Serial => data.chunks_mut(n).enumerate().try_for_each(|(i, b)| f(i, b)),
        Execution::Parallel => data.par_chunks_mut(n).enumerate().try_for_each(|(i, b)| f(i, b)),
    }
}

pub(crate) fn for_each_block<F>(exec: Execution, data: &mut [f64], n: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if n == 0 {
        return;
    }
    match exec {
        Execution::Serial => data.chunks_mut(n).enumerate().for_each(|(i, b)| f(i, b)),
        Execution::Parallel => data.par_chunks_mut(n).enumerate().for_each(|(i, b)| f(i, b)),
    }
}
