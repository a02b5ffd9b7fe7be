use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm_ratio, MirrorMap};

/// Proximal weights `δ_i`: one scalar for every vertex, or a per-vertex list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Delta {
    Scalar(f64),
    PerVertex(Vec<f64>),
}

impl Default for Delta {
    fn default() -> Self {
        Delta::Scalar(0.0)
    }
}

impl Delta {
    pub fn get(&self, i: usize) -> f64 {
        match self {
            Delta::Scalar(d) => *d,
            Delta::PerVertex(v) => v[i],
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            Delta::Scalar(d) => *d,
            Delta::PerVertex(v) => v.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Delta::Scalar(d) => *d == 0.0,
            Delta::PerVertex(v) => v.iter().all(|&d| d == 0.0),
        }
    }
}

fn yes() -> bool {
    true
}

/// Parameters of one solver run.
///
/// `tau` is the dual step of the Bregman variant; the Euclidean variant always
/// uses `rho` as its dual step. `gamma` weights the consensus term of the
/// residual `R` that drives `stop_tol`. When `strict` is set, the run refuses
/// parameters outside `0 < γ < μσ`, `τ ≤ ρ(μσ − γ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rho: f64,
    pub tau: f64,
    #[serde(default)]
    pub delta: Delta,
    pub gamma: f64,
    pub mirror: MirrorMap,
    /// Generator of the proximal terms `B_{φ_i}`; defaults to `mirror`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prox: Option<MirrorMap>,
    pub max_iters: usize,
    #[serde(default)]
    pub stop_tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub strict: bool,
}

impl Default for SolverConfig {
    /// `ρ = 1`, `τ = 1/2`, `γ = 1/4`, `δ = 0`, negative entropy.
    fn default() -> Self {
        SolverConfig {
            rho: 1.0,
            tau: 0.5,
            delta: Delta::Scalar(0.0),
            gamma: 0.25,
            mirror: MirrorMap::NegativeEntropy,
            prox: None,
            max_iters: 1000,
            stop_tol: 0.0,
            seed: 0,
            strict: true,
        }
    }
}

impl SolverConfig {
    pub fn prox_map(&self) -> MirrorMap {
        self.prox.unwrap_or(self.mirror)
    }

    /// Checks positivity of every parameter and, in strict mode, the
    /// step-size rule for dimension `n`.
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::invalid(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.stop_tol.is_nan() {
            return Err(Error::invalid("stop_tol is NaN"));
        }
        match &self.delta {
            Delta::Scalar(d) if !(*d >= 0.0 && d.is_finite()) => {
                return Err(Error::invalid(format!("delta must be nonnegative, got {d}")));
            }
            Delta::PerVertex(v) => {
                if v.len() != m {
                    return Err(Error::Dimension { expected: m, got: v.len() });
                }
                if v.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
                    return Err(Error::invalid("every delta_i must be nonnegative"));
                }
            }
            _ => {}
        }
        if self.strict {
            let bound = self.mirror.modulus() * self.mirror.sigma(n);
            if self.gamma >= bound {
                return Err(Error::ParameterRule(format!(
                    "gamma = {} must be below mu*sigma = {bound}",
                    self.gamma
                )));
            }
            let tau_max = self.rho * (bound - self.gamma);
            if self.tau > tau_max {
                return Err(Error::ParameterRule(format!(
                    "tau = {} exceeds rho*(mu*sigma - gamma) = {tau_max}",
                    self.tau
                )));
            }
        }
        Ok(())
    }
}

/// Largest admissible dual step `ρ(μσ − γ)` for a map with modulus `mu` and
/// norm index `p` (may be infinite) in dimension `n`.
pub fn step_size_bound(mu: f64, p: f64, n: usize, rho: f64, gamma: f64) -> Result<f64> {
    let ms = mu * norm_ratio(p, n);
    if !(gamma > 0.0 && gamma < ms) {
        return Err(Error::ParameterRule(format!("gamma = {gamma} must lie in (0, {ms})")));
    }
    Ok(rho * (ms - gamma))
}

/// `τ = ρ(μσ − γ)`, the largest step allowed by the descent guarantee.
pub fn default_step_size(phi: MirrorMap, n: usize, rho: f64, gamma: f64) -> Result<f64> {
    step_size_bound(phi.modulus(), phi.norm_index(), n, rho, gamma)
}
