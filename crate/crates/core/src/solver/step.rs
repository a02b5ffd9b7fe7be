use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::problem::{LocalObjective, ProblemInstance};
use super::prox::{closed_form, solve_local_prox, LocalProx};
use crate::error::{Error, Result};
use crate::exec::{for_each_block, try_for_each_block, Execution};
use crate::geometry::{mirror_average, FeasibleSet, MirrorMap, StackedPoint};
use crate::graph::AveragingMatrix;

/// Which iteration engine a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Euclidean PDMM: plain averaging, dual step `ρ`.
    Euclid,
    /// Bregman PDMM: mirror averaging, dual step `τ`.
    Bregman,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Euclid => "euclid",
            Variant::Bregman => "bregman",
        }
    }

    /// The parameters the engine effectively runs with. The Euclidean engine
    /// is the Bregman one with the squared Euclidean map, `τ = ρ`, `δ = 0`.
    pub fn effective_config(self, cfg: &SolverConfig) -> SolverConfig {
        match self {
            Variant::Bregman => cfg.clone(),
            Variant::Euclid => SolverConfig {
                tau: cfg.rho,
                delta: Default::default(),
                mirror: MirrorMap::SquaredEuclidean,
                prox: None,
                ..cfg.clone()
            },
        }
    }
}

/// Primal iterate `x`, its average `y` (the input of the next primal solve),
/// and duals `ν` at iteration `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateState {
    pub t: usize,
    pub x: StackedPoint,
    pub y: StackedPoint,
    pub nu: StackedPoint,
}

/// Default starting primal: uniform blocks on the simplex (and for the entropy
/// map, whose domain excludes zero), zeros on free space otherwise.
pub fn initial_primal(problem: &ProblemInstance, mirror: MirrorMap) -> StackedPoint {
    let n = problem.n();
    match (problem.set(), mirror) {
        (FeasibleSet::FreeSpace, MirrorMap::SquaredEuclidean) => StackedPoint::zeros(problem.m(), n),
        _ => StackedPoint::consensus(problem.m(), &vec![1.0 / n as f64; n]),
    }
}

impl IterateState {
    /// State at `t = 0` from primal `x` and zero duals; `y` is the average of
    /// `x` that the chosen engine uses.
    pub fn start(
        x: StackedPoint,
        p: &AveragingMatrix,
        cfg: &SolverConfig,
        set: FeasibleSet,
        variant: Variant,
        exec: Execution,
    ) -> Result<Self> {
        let y = average(p, &variant.effective_config(cfg), set, variant, &x, exec)?;
        let nu = StackedPoint::zeros(x.m(), x.n());
        Ok(IterateState { t: 0, x, y, nu })
    }

    /// The default start: [`initial_primal`] with zero duals.
    pub fn initial(
        problem: &ProblemInstance,
        p: &AveragingMatrix,
        cfg: &SolverConfig,
        variant: Variant,
        exec: Execution,
    ) -> Result<Self> {
        let eff = variant.effective_config(cfg);
        let x = initial_primal(problem, eff.mirror);
        IterateState::start(x, p, cfg, problem.set(), variant, exec)
    }
}

fn average(
    p: &AveragingMatrix,
    eff: &SolverConfig,
    set: FeasibleSet,
    variant: Variant,
    x: &StackedPoint,
    exec: Execution,
) -> Result<StackedPoint> {
    match variant {
        Variant::Euclid => mirror_average(p, MirrorMap::SquaredEuclidean, FeasibleSet::FreeSpace, x, exec),
        Variant::Bregman => mirror_average(p, eff.mirror, set, x, exec),
    }
}

/// `Δν_i = ν_i − Σ_j P_ij ν_j`.
pub fn dual_residual_vector(nu: &StackedPoint, p: &AveragingMatrix, i: usize) -> Vec<f64> {
    let mut out = vec![0.0; nu.n()];
    p.mix_block(i, nu.data(), &mut out);
    for (o, v) in out.iter_mut().zip(nu.block(i)) {
        *o = v - *o;
    }
    out
}

/// `((I − P) ⊗ I)x`.
pub(crate) fn disagreement(p: &AveragingMatrix, x: &StackedPoint, exec: Execution) -> StackedPoint {
    let mixed = p.mix_stack(x.data(), x.n(), exec);
    subtract_from(x, mixed, exec)
}

/// `x − mixed`, reusing the buffer of `mixed`.
fn subtract_from(x: &StackedPoint, mut mixed: Vec<f64>, exec: Execution) -> StackedPoint {
    let n = x.n();
    for_each_block(exec, &mut mixed, n, |i, out| {
        for (o, v) in out.iter_mut().zip(x.block(i)) {
            *o = v - *o;
        }
    });
    StackedPoint::from_data(x.m(), n, mixed).expect("shape preserved")
}

/// Result of one iteration together with `((I − P) ⊗ I)x⁺`.
pub(crate) struct Step {
    pub state: IterateState,
    pub disagreement: StackedPoint,
}

fn check_shapes(state: &IterateState, problem: &ProblemInstance, p: &AveragingMatrix) -> Result<()> {
    if p.m() != problem.m() {
        return Err(Error::Dimension { expected: problem.m(), got: p.m() });
    }
    for s in [&state.x, &state.y, &state.nu] {
        if s.m() != problem.m() {
            return Err(Error::Dimension { expected: problem.m(), got: s.m() });
        }
        if s.n() != problem.n() {
            return Err(Error::Dimension { expected: problem.n(), got: s.n() });
        }
    }
    Ok(())
}

pub(crate) fn step_detailed(
    state: &IterateState,
    problem: &ProblemInstance,
    p: &AveragingMatrix,
    cfg: &SolverConfig,
    variant: Variant,
    exec: Execution,
) -> Result<Step> {
    check_shapes(state, problem, p)?;
    let eff = variant.effective_config(cfg);
    let n = problem.n();
    let set = problem.set();
    let prox_map = eff.prox_map();

    let dnu_all = subtract_from(&state.nu, p.mix_stack(state.nu.data(), n, exec), exec);
    let mut x = StackedPoint::zeros(problem.m(), n);
    try_for_each_block(exec, x.data_mut(), n, |i, out| {
        let dnu = dnu_all.block(i);
        let lp = LocalProx { rho: eff.rho, delta: eff.delta.get(i), mirror: eff.mirror, prox: prox_map, set };
        let f = &problem.objectives()[i];
        match f {
            LocalObjective::Linear(c) if lp.delta == 0.0 || lp.mirror == lp.prox => {
                let a: Vec<f64> = c.iter().zip(dnu).map(|(c, d)| c + d).collect();
                closed_form(&a, state.y.block(i), state.x.block(i), &lp, out);
            }
            _ => {
                let v = solve_local_prox(f, dnu, state.y.block(i), state.x.block(i), &lp).map_err(
                    |e| match e {
                        Error::InnerSolver { reason, .. } => Error::InnerSolver { vertex: i, reason },
                        e => e,
                    },
                )?;
                out.copy_from_slice(&v);
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::InnerSolver { vertex: i, reason: "non-finite primal update".into() });
        }
        Ok(())
    })?;

    let mixed = p.mix_stack(x.data(), n, exec);
    // The Euclidean engine's average is the plain product just computed.
    let y = match variant {
        Variant::Euclid => Some(StackedPoint::from_data(problem.m(), n, mixed.clone())?),
        Variant::Bregman => None,
    };
    let r = subtract_from(&x, mixed, exec);
    let mut nu = state.nu.clone();
    for_each_block(exec, nu.data_mut(), n, |i, out| {
        for (o, d) in out.iter_mut().zip(r.block(i)) {
            *o += eff.tau * d;
        }
    });
    let y = match y {
        Some(y) => y,
        None => average(p, &eff, set, variant, &x, exec)?,
    };
    Ok(Step { state: IterateState { t: state.t + 1, x, y, nu }, disagreement: r })
}

/// One iteration of Euclidean PDMM: `x_i⁺ = Π_X(x̄_i − (c_i + Δν_i)/ρ)` with
/// `x̄ = (P ⊗ I)x`, then `ν⁺ = ν + ρ((I − P) ⊗ I)x⁺`.
///
/// `state.y` must hold `(P ⊗ I)state.x`, as produced by [`IterateState::start`]
/// and by this function.
pub fn pdmm_step(
    state: &IterateState,
    problem: &ProblemInstance,
    p: &AveragingMatrix,
    cfg: &SolverConfig,
    exec: Execution,
) -> Result<IterateState> {
    Ok(step_detailed(state, problem, p, cfg, Variant::Euclid, exec)?.state)
}

/// One iteration of Bregman PDMM: per-vertex local prox around the mirror
/// average `y`, dual step `τ`, then the mirror average of the new primal.
///
/// `state.y` must hold the mirror average of `state.x`.
pub fn bregman_pdmm_step(
    state: &IterateState,
    problem: &ProblemInstance,
    p: &AveragingMatrix,
    cfg: &SolverConfig,
    exec: Execution,
) -> Result<IterateState> {
    Ok(step_detailed(state, problem, p, cfg, Variant::Bregman, exec)?.state)
}
