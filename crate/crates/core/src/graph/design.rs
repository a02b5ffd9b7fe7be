//! Spectral design of averaging matrices by projected subgradient descent on
//! symmetric edge weights.
//!
//! With edge weights `w`, `P(w) = I − Σ_e w_e (e_i − e_j)(e_i − e_j)ᵀ`, so
//! symmetry and unit row sums hold by construction and the feasible set is
//! `w ≥ 0`, `Σ_{e ∋ i} w_e ≤ 1`. For an eigenpair `(λ, u)` of `P`,
//! `∂λ/∂w_e = −(u_i − u_j)²`.

use super::averaging::{build_laplacian_averaging, AveragingMatrix, PSD_TOL};
use super::eigen::jacobi_eigen;
use super::Graph;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Target {
    /// `max(λ₂, −λ_m)` over the non-consensus spectrum; PSD fixed afterwards.
    Magnitude,
    /// `λ₂` subject to `λ_min ≥ 0`, stepping on the violated constraint when
    /// infeasible.
    PsdConstrained,
}

struct Extremes {
    top: (f64, Vec<f64>),
    bottom: (f64, Vec<f64>),
}

/// Largest and smallest eigenpairs after removing the consensus direction.
fn extremes(p: &AveragingMatrix) -> Result<Extremes> {
    let m = p.m();
    let e = jacobi_eigen(p.entries(), m)?;
    let consensus = (0..m)
        .max_by(|&a, &b| {
            let da: f64 = e.vector(a).iter().sum::<f64>().abs();
            let db: f64 = e.vector(b).iter().sum::<f64>().abs();
            da.total_cmp(&db)
        })
        .unwrap_or(0);
    let rest = (0..m).filter(|&k| k != consensus);
    let top = rest.clone().max_by(|&a, &b| e.values[a].total_cmp(&e.values[b])).unwrap();
    let bottom = rest.min_by(|&a, &b| e.values[a].total_cmp(&e.values[b])).unwrap();
    Ok(Extremes {
        top: (e.values[top], e.vector(top)),
        bottom: (e.values[bottom], e.vector(bottom)),
    })
}

fn project(weights: &mut [f64], edges: &[(usize, usize)], m: usize) {
    weights.iter_mut().for_each(|w| *w = w.max(0.0));
    let mut load = vec![0.0; m];
    for (&(i, j), &w) in edges.iter().zip(weights.iter()) {
        load[i] += w;
        load[j] += w;
    }
    for (&(i, j), w) in edges.iter().zip(weights.iter_mut()) {
        let scale = 1.0f64.min(1.0 / load[i].max(1e-300)).min(1.0 / load[j].max(1e-300));
        *w *= scale;
    }
}

/// Runs the subgradient loop and returns the best matrix seen, or `None` if
/// no iterate met the target's feasibility requirement.
fn descend(
    g: &Graph,
    edges: &[(usize, usize)],
    start: &[f64],
    iters: usize,
    target: Target,
) -> Result<Option<(f64, AveragingMatrix)>> {
    let m = g.m();
    let step0 = 1.0 / (2.0 * g.max_degree() as f64);
    let mut w = start.to_vec();
    let mut best: Option<(f64, AveragingMatrix)> = None;

    for k in 1..=iters + 1 {
        let p = AveragingMatrix::from_edge_weights(m, edges, &w);
        let ex = extremes(&p)?;
        let (value, feasible, (sign, u)) = match target {
            Target::Magnitude => {
                if ex.top.0 >= -ex.bottom.0 {
                    (ex.top.0, true, (-1.0, ex.top.1))
                } else {
                    (-ex.bottom.0, true, (1.0, ex.bottom.1))
                }
            }
            Target::PsdConstrained => {
                if ex.bottom.0 < 0.0 {
                    (ex.top.0, false, (1.0, ex.bottom.1))
                } else {
                    (ex.top.0, true, (-1.0, ex.top.1))
                }
            }
        };
        if feasible && best.as_ref().map_or(true, |(b, _)| value < *b) {
            best = Some((value, p));
        }
        if k > iters {
            break;
        }
        let grad: Vec<f64> = edges.iter().map(|&(i, j)| sign * (u[i] - u[j]).powi(2)).collect();
        let norm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-15 {
            break;
        }
        let step = step0 / (k as f64).sqrt();
        w.iter_mut().zip(&grad).for_each(|(wi, gi)| *wi -= step * gi / norm);
        project(&mut w, edges, m);
    }
    Ok(best)
}

/// Designs a PSD averaging matrix on `g` with small `|λ₂|`.
///
/// Two subgradient runs start from the Laplacian weights: one minimizes
/// `max(λ₂, −λ_m)` and applies `(P + I)/2` only if the result is not PSD; the
/// other minimizes `λ₂` under `λ_min ≥ 0`. The best of these and the Laplacian
/// baseline is returned, so the result never has larger `|λ₂|` than
/// [`build_laplacian_averaging`].
pub fn optimize_averaging_matrix(g: &Graph, iters: usize) -> Result<AveragingMatrix> {
    let baseline = build_laplacian_averaging(g)?;
    let m = g.m();
    if m < 2 || iters == 0 {
        return Ok(baseline);
    }
    let edges: Vec<_> = g.edges().collect();
    let start = vec![1.0 / (2.0 * g.max_degree() as f64); edges.len()];

    let mut candidates = vec![baseline];
    if let Some((_, p)) = descend(g, &edges, &start, iters, Target::Magnitude)? {
        if p.spectrum()?.min_eigenvalue() >= -PSD_TOL {
            candidates.push(p);
        } else {
            candidates.push(p.lazy());
        }
    }
    if let Some((_, p)) = descend(g, &edges, &start, iters, Target::PsdConstrained)? {
        candidates.push(p);
    }

    let mut best = candidates.swap_remove(0);
    let mut best_l2 = best.lambda2_abs()?;
    for c in candidates {
        let l2 = c.lambda2_abs()?;
        if l2 < best_l2 && c.spectrum()?.min_eigenvalue() >= -PSD_TOL {
            best = c;
            best_l2 = l2;
        }
    }
    Ok(best)
}
