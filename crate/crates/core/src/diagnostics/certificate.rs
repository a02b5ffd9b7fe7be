use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, StackedPoint};
use crate::graph::AveragingMatrix;
use crate::solver::ProblemInstance;

/// Largest KKT violation a certificate may carry.
pub const KKT_TOLERANCE: f64 = 1e-8;
/// Eigenvalues of `P − I` below this magnitude are treated as zero by the
/// pseudoinverse.
pub const PINV_ZERO_TOL: f64 = 1e-10;

/// A saddle point `(x⋆, ν⋆)` of the consensus Lagrangian together with the
/// normal-cone elements `g_i ∈ N_X(x_i⋆)` that close the KKT system
/// `(Pν⋆)_i − ν_i⋆ − g_i = c_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleCertificate {
    pub x_star: StackedPoint,
    pub nu_star: StackedPoint,
    pub g: StackedPoint,
    /// Largest violation of the stationarity equations or of the normal-cone
    /// inequalities on simplex vertices.
    pub residual_kkt: f64,
    /// Index `k⋆` of the optimal vertex.
    pub vertex: usize,
}

/// Builds a certificate for linear costs over the simplex at the consensus
/// vertex `x⋆ = 1 ⊗ e_{k⋆}`.
///
/// Every `g_i` is set to `−(1/m)Σ_j c_j`, and `ν⋆` is the minimum-norm solution
/// of `(P − I)ν = c + g`, computed block-column-wise from the eigenvectors of
/// `P`. The result lies in the range of `(I − P) ⊗ I`.
pub fn certificate_search(
    problem: &ProblemInstance,
    p: &AveragingMatrix,
    x_star: &StackedPoint,
) -> Result<SaddleCertificate> {
    let (m, n) = (problem.m(), problem.n());
    let c = problem
        .linear_costs()
        .ok_or_else(|| Error::invalid("certificates need linear objectives"))?;
    if problem.set() != FeasibleSet::ProbabilitySimplex {
        return Err(Error::invalid("certificates need the probability simplex"));
    }
    if p.m() != m {
        return Err(Error::Dimension { expected: m, got: p.m() });
    }
    if x_star.m() != m || x_star.n() != n {
        return Err(Error::Dimension { expected: m * n, got: x_star.data().len() });
    }
    let u = x_star.block(0);
    if x_star.blocks().any(|b| b != u) || !FeasibleSet::ProbabilitySimplex.contains(u) {
        return Err(Error::invalid("x_star must be a feasible consensus point"));
    }
    let vertex = (0..n).fold(0, |best, k| if u[k] > u[best] { k } else { best });

    let total = c.block_sum();
    let gbar: Vec<f64> = total.iter().map(|v| -v / m as f64).collect();
    let g = StackedPoint::consensus(m, &gbar);

    // b = c + g, solved along each eigenvector of P with eigenvalue away from 1.
    let eigen = &p.spectrum()?.eigen;
    let mut nu = StackedPoint::zeros(m, n);
    for k in 0..m {
        let shift = eigen.values[k] - 1.0;
        if shift.abs() < PINV_ZERO_TOL {
            continue;
        }
        let uk = eigen.vector(k);
        let mut coef = vec![0.0; n];
        for (i, w) in uk.iter().enumerate() {
            for ((cf, ci), gi) in coef.iter_mut().zip(c.block(i)).zip(&gbar) {
                *cf += w * (ci + gi);
            }
        }
        for (i, w) in uk.iter().enumerate() {
            let s = w / shift;
            for (v, cf) in nu.block_mut(i).iter_mut().zip(&coef) {
                *v += s * cf;
            }
        }
    }

    let mut residual = 0.0f64;
    let mut mixed = vec![0.0; n];
    for i in 0..m {
        p.mix_block(i, nu.data(), &mut mixed);
        for k in 0..n {
            let r = mixed[k] - nu.block(i)[k] - gbar[k] - c.block(i)[k];
            residual = residual.max(r.abs());
        }
    }
    // ⟨g, x⋆ − e_l⟩ ≥ 0 for every vertex e_l
    let gx: f64 = gbar.iter().zip(u).map(|(a, b)| a * b).sum();
    for gl in &gbar {
        residual = residual.max(gl - gx);
    }
    if !(residual <= KKT_TOLERANCE) {
        return Err(Error::Certificate { residual, tolerance: KKT_TOLERANCE });
    }
    Ok(SaddleCertificate { x_star: x_star.clone(), nu_star: nu, g, residual_kkt: residual, vertex })
}
