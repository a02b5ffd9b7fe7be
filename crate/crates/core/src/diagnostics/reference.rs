use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{euclidean_simplex_projection, FeasibleSet};
use crate::solver::ProblemInstance;

/// Iterations of the central projected-subgradient solve used when no closed
/// form applies.
pub const CENTRAL_SOLVE_ITERS: usize = 10_000;

/// Optimal value `f⋆` of the centralized problem `min_{u ∈ X} Σ_i f_i(u)` and
/// a minimizer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceSolution {
    pub value: f64,
    pub block: Vec<f64>,
    /// Index of the optimal simplex vertex when the minimizer is one.
    pub vertex: Option<usize>,
}

/// Linear costs over the simplex are minimized at the vertex with the smallest
/// aggregate cost (smallest index on ties). Other problems are solved by
/// projected subgradient with normalized steps `1/√k`, keeping the best
/// iterate.
pub fn reference_solution(problem: &ProblemInstance) -> Result<ReferenceSolution> {
    let n = problem.n();
    if let Some(c) = problem.linear_costs() {
        let total = c.block_sum();
        match problem.set() {
            FeasibleSet::ProbabilitySimplex => {
                let k = (0..n).fold(0, |best, k| if total[k] < total[best] { k } else { best });
                let mut block = vec![0.0; n];
                block[k] = 1.0;
                return Ok(ReferenceSolution { value: total[k], block, vertex: Some(k) });
            }
            FeasibleSet::FreeSpace => {
                if total.iter().any(|v| *v != 0.0) {
                    return Err(Error::invalid("linear objective is unbounded below on free space"));
                }
                return Ok(ReferenceSolution { value: 0.0, block: vec![0.0; n], vertex: None });
            }
        }
    }

    let set = problem.set();
    let mut u = match set {
        FeasibleSet::ProbabilitySimplex => vec![1.0 / n as f64; n],
        FeasibleSet::FreeSpace => vec![0.0; n],
    };
    let eval = |u: &[f64]| problem.objectives().iter().map(|f| f.value(u)).sum::<f64>();
    let mut best = (eval(&u), u.clone());
    for k in 1..=CENTRAL_SOLVE_ITERS {
        let mut g = vec![0.0; n];
        for f in problem.objectives() {
            for (a, b) in g.iter_mut().zip(f.subgradient(&u)) {
                *a += b;
            }
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let eta = 1.0 / ((k as f64).sqrt() * norm);
        let v: Vec<f64> = u.iter().zip(&g).map(|(a, b)| a - eta * b).collect();
        u = match set {
            FeasibleSet::ProbabilitySimplex => euclidean_simplex_projection(&v),
            FeasibleSet::FreeSpace => v,
        };
        let val = eval(&u);
        if !val.is_finite() {
            return Err(Error::InnerSolver { vertex: 0, reason: "central solve diverged".into() });
        }
        if val < best.0 {
            best = (val, u.clone());
        }
    }
    Ok(ReferenceSolution { value: best.0, block: best.1, vertex: None })
}
