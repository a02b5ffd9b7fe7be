use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, StackedPoint};

/// A convex function known through values and one subgradient per point.
pub trait ConvexOracle: Send + Sync + fmt::Debug {
    fn value(&self, x: &[f64]) -> f64;
    fn subgradient(&self, x: &[f64]) -> Vec<f64>;
}

/// The local cost `f_i` held by one vertex.
#[derive(Clone, Debug)]
pub enum LocalObjective {
    /// `f_i(x) = ⟨c_i, x⟩`.
    Linear(Vec<f64>),
    Oracle(Arc<dyn ConvexOracle>),
}

impl LocalObjective {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            LocalObjective::Linear(c) => dot(c, x),
            LocalObjective::Oracle(o) => o.value(x),
        }
    }

    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            LocalObjective::Linear(c) => c.clone(),
            LocalObjective::Oracle(o) => o.subgradient(x),
        }
    }

    pub fn as_linear(&self) -> Option<&[f64]> {
        match self {
            LocalObjective::Linear(c) => Some(c),
            LocalObjective::Oracle(_) => None,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `minimize Σ_i f_i(x_i)` over `X^m` subject to `(P ⊗ I_n)x = x`.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    n: usize,
    objectives: Vec<LocalObjective>,
    set: FeasibleSet,
}

impl ProblemInstance {
    pub fn new(n: usize, objectives: Vec<LocalObjective>, set: FeasibleSet) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension n must be positive"));
        }
        if objectives.is_empty() {
            return Err(Error::invalid("need at least one vertex objective"));
        }
        for o in &objectives {
            if let LocalObjective::Linear(c) = o {
                if c.len() != n {
                    return Err(Error::Dimension { expected: n, got: c.len() });
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("cost vectors must be finite"));
                }
            }
        }
        Ok(ProblemInstance { n, objectives, set })
    }

    /// Linear costs, one block of `costs` per vertex.
    pub fn linear(costs: &StackedPoint, set: FeasibleSet) -> Result<Self> {
        let objectives = costs.blocks().map(|c| LocalObjective::Linear(c.to_vec())).collect();
        ProblemInstance::new(costs.n(), objectives, set)
    }

    pub fn m(&self) -> usize {
        self.objectives.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&self) -> FeasibleSet {
        self.set
    }

    pub fn objectives(&self) -> &[LocalObjective] {
        &self.objectives
    }

    /// The stacked cost vectors when every objective is linear.
    pub fn linear_costs(&self) -> Option<StackedPoint> {
        let mut data = Vec::with_capacity(self.m() * self.n);
        for o in &self.objectives {
            data.extend_from_slice(o.as_linear()?);
        }
        StackedPoint::from_data(self.m(), self.n, data).ok()
    }

    /// `Σ_i f_i(x_i)`.
    pub fn objective(&self, x: &StackedPoint) -> f64 {
        self.objectives.iter().zip(x.blocks()).map(|(f, b)| f.value(b)).sum()
    }
}
