use super::problem::LocalObjective;
use crate::error::{Error, Result};
use crate::geometry::{project_simplex_into, FeasibleSet, MirrorMap, ENTROPY_FLOOR};

/// Inner iteration cap of the numeric subproblem solver.
pub const PROX_MAX_ITERS: usize = 500;
/// The numeric solver stops once an inner step moves no coordinate by more
/// than this.
pub const PROX_TOLERANCE: f64 = 1e-10;

/// Data of one vertex's local subproblem
/// `argmin_{x ∈ X} f_i(x) + ⟨x, Δν_i⟩ + ρ B_φ(x, y_i) + δ_i B_{φ_i}(x, x_prev)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalProx {
    pub rho: f64,
    pub delta: f64,
    pub mirror: MirrorMap,
    pub prox: MirrorMap,
    pub set: FeasibleSet,
}

/// Solves the local subproblem of one vertex.
///
/// Linear objectives with a shared map (or `δ_i = 0`) use closed forms:
/// a weighted shift followed by projection for the squared Euclidean map, a
/// multiplicative update followed by renormalization for negative entropy.
/// Everything else goes through a projected (mirror) subgradient loop with
/// step `1/(ρk)`; when it exhausts [`PROX_MAX_ITERS`] the last iterate is
/// returned.
pub fn solve_local_prox(
    f: &LocalObjective,
    dnu: &[f64],
    y: &[f64],
    x_prev: &[f64],
    lp: &LocalProx,
) -> Result<Vec<f64>> {
    let n = y.len();
    if dnu.len() != n || x_prev.len() != n {
        return Err(Error::Dimension { expected: n, got: dnu.len().min(x_prev.len()) });
    }
    let mut out = vec![0.0; n];
    match f {
        LocalObjective::Linear(c) if lp.delta == 0.0 || lp.mirror == lp.prox => {
            if c.len() != n {
                return Err(Error::Dimension { expected: n, got: c.len() });
            }
            let a: Vec<f64> = c.iter().zip(dnu).map(|(c, d)| c + d).collect();
            closed_form(&a, y, x_prev, lp, &mut out);
        }
        _ => numeric_prox(f, dnu, y, x_prev, lp, &mut out)?,
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::InnerSolver { vertex: 0, reason: "non-finite subproblem solution".into() });
    }
    Ok(out)
}

/// Closed-form solution for the linear term `a = c_i + Δν_i`.
pub(crate) fn closed_form(a: &[f64], y: &[f64], x_prev: &[f64], lp: &LocalProx, out: &mut [f64]) {
    let (rho, delta) = (lp.rho, lp.delta);
    match lp.mirror {
        MirrorMap::SquaredEuclidean => {
            if delta == 0.0 {
                for ((o, y), a) in out.iter_mut().zip(y).zip(a) {
                    *o = y - a / rho;
                }
            } else {
                let s = rho + delta;
                for (((o, y), xp), a) in out.iter_mut().zip(y).zip(x_prev).zip(a) {
                    *o = (rho * y + delta * xp - a) / s;
                }
            }
            project_euclidean(lp.set, out);
        }
        MirrorMap::NegativeEntropy => {
            if delta == 0.0 {
                for ((o, y), a) in out.iter_mut().zip(y).zip(a) {
                    *o = y.ln() - a / rho;
                }
            } else {
                let s = rho + delta;
                for (((o, y), xp), a) in out.iter_mut().zip(y).zip(x_prev).zip(a) {
                    *o = (rho * y.ln() + delta * xp.ln() - a) / s;
                }
            }
            exp_normalize(lp.set, out);
        }
    }
}

fn project_euclidean(set: FeasibleSet, v: &mut [f64]) {
    if let FeasibleSet::ProbabilitySimplex = set {
        let z = v.to_vec();
        project_simplex_into(&z, v);
    }
}

/// Maps log-weights to the entropy domain: renormalized on the simplex
/// (shifted by the maximum first), plain `exp` on free space. Coordinates are
/// floored at [`ENTROPY_FLOOR`] so iterates stay strictly positive.
fn exp_normalize(set: FeasibleSet, logw: &mut [f64]) {
    match set {
        FeasibleSet::ProbabilitySimplex => {
            let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut s = 0.0;
            for v in logw.iter_mut() {
                *v = (*v - top).exp();
                s += *v;
            }
            for v in logw.iter_mut() {
                *v = (*v / s).max(ENTROPY_FLOOR);
            }
        }
        FeasibleSet::FreeSpace => {
            for v in logw.iter_mut() {
                *v = v.exp().max(ENTROPY_FLOOR);
            }
        }
    }
}

fn grad(phi: MirrorMap, x: f64) -> f64 {
    match phi {
        MirrorMap::SquaredEuclidean => x,
        MirrorMap::NegativeEntropy => 1.0 + x.ln(),
    }
}

fn numeric_prox(
    f: &LocalObjective,
    dnu: &[f64],
    y: &[f64],
    x_prev: &[f64],
    lp: &LocalProx,
    out: &mut [f64],
) -> Result<()> {
    let n = y.len();
    let mut x = y.to_vec();
    let mut next = vec![0.0; n];
    for k in 1..=PROX_MAX_ITERS {
        let g0 = f.subgradient(&x);
        if g0.len() != n {
            return Err(Error::Dimension { expected: n, got: g0.len() });
        }
        let eta = 1.0 / (lp.rho * k as f64);
        for j in 0..n {
            let mut g = g0[j] + dnu[j] + lp.rho * (grad(lp.mirror, x[j]) - grad(lp.mirror, y[j]));
            if lp.delta > 0.0 {
                g += lp.delta * (grad(lp.prox, x[j]) - grad(lp.prox, x_prev[j]));
            }
            next[j] = match lp.mirror {
                MirrorMap::SquaredEuclidean => x[j] - eta * g,
                MirrorMap::NegativeEntropy => x[j].ln() - eta * g,
            };
        }
        match lp.mirror {
            MirrorMap::SquaredEuclidean => project_euclidean(lp.set, &mut next),
            MirrorMap::NegativeEntropy => exp_normalize(lp.set, &mut next),
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::InnerSolver {
                vertex: 0,
                reason: format!("non-finite iterate at inner step {k}"),
            });
        }
        let change = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if change <= PROX_TOLERANCE {
            break;
        }
    }
    out.copy_from_slice(&x);
    Ok(())
}
