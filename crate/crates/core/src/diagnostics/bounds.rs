use serde::Serialize;

use super::certificate::SaddleCertificate;
use super::lyapunov_v;
use crate::error::{Error, Result};
use crate::geometry::bregman_divergence;
use crate::solver::{IterateState, ProblemInstance, SolverConfig};

/// Right-hand sides of the ergodic convergence bounds after `T` iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateBounds {
    /// `(ρ Σ B_φ(x_i⋆, y_i⁽⁰⁾) + Σ δ_i B_{φ_i}(x_i⋆, x_i⁽⁰⁾)) / T`.
    pub instance_objective: f64,
    /// `V(0)/(γT)`.
    pub instance_consensus: f64,
    /// `m(ρ + δ_max) ln n / T`.
    pub uniform_objective: f64,
    /// `4mM₀/(ρ²(1 − λ₂)²T) + 4m(ρ + δ_max) ln n/(ρT)`.
    pub uniform_consensus: f64,
}

/// `M₀ = max_i ‖c_i‖²` for linear objectives.
pub fn cost_bound_m0(problem: &ProblemInstance) -> Option<f64> {
    problem.objectives().iter().try_fold(0.0f64, |acc, f| {
        Some(acc.max(f.as_linear()?.iter().map(|v| v * v).sum()))
    })
}

/// Evaluates the four bounds. The first two are instance-specific and need the
/// certificate; the last two hold for entropy on the simplex started from
/// uniform blocks with zero duals.
#[allow(clippy::too_many_arguments)]
pub fn rate_bounds(
    cert: Option<&SaddleCertificate>,
    initial: &IterateState,
    cfg: &SolverConfig,
    t: usize,
    m: usize,
    n: usize,
    m0: f64,
    lambda2: f64,
) -> Result<RateBounds> {
    let cert = cert.ok_or(Error::MissingCertificate)?;
    if t == 0 {
        return Err(Error::invalid("bounds need T >= 1"));
    }
    let tf = t as f64;
    let prox = cfg.prox_map();
    let mut primal = 0.0;
    for i in 0..cert.x_star.m() {
        let xs = cert.x_star.block(i);
        primal += cfg.rho * bregman_divergence(cfg.mirror, xs, initial.y.block(i))?;
        let d = cfg.delta.get(i);
        if d > 0.0 {
            primal += d * bregman_divergence(prox, xs, initial.x.block(i))?;
        }
    }
    let v0 = lyapunov_v(initial, cert, cfg)?;
    let (mf, rho, dmax) = (m as f64, cfg.rho, cfg.delta.max());
    let ln_n = (n as f64).ln();
    let gap = 1.0 - lambda2;
    Ok(RateBounds {
        instance_objective: primal / tf,
        instance_consensus: v0 / (cfg.gamma * tf),
        uniform_objective: mf * (rho + dmax) * ln_n / tf,
        uniform_consensus: 4.0 * mf * m0 / (rho * rho * gap * gap * tf) + 4.0 * mf * (rho + dmax) * ln_n / (rho * tf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{certificate_search, reference_solution};
    use crate::exec::Execution;
    use crate::geometry::{FeasibleSet, StackedPoint};
    use crate::graph::{build_laplacian_averaging, gen_erdos_renyi};
    use crate::rng::Stream;
    use crate::solver::Variant;

    fn setup(m: usize, n: usize, seed: u64) -> (ProblemInstance, crate::graph::AveragingMatrix, SaddleCertificate) {
        let g = gen_erdos_renyi(m, 0.3, seed).unwrap();
        let p = build_laplacian_averaging(&g).unwrap();
        let mut s = Stream::new(seed);
        let c = StackedPoint::from_data(m, n, (0..m * n).map(|_| s.standard_normal()).collect()).unwrap();
        let problem = ProblemInstance::linear(&c, FeasibleSet::ProbabilitySimplex).unwrap();
        let r = reference_solution(&problem).unwrap();
        let cert = certificate_search(&problem, &p, &StackedPoint::consensus(m, &r.block)).unwrap();
        (problem, p, cert)
    }

    #[test]
    fn uniform_start_gives_m_ln_n() {
        let (m, n) = (8, 6);
        let (problem, p, cert) = setup(m, n, 4);
        let cfg = SolverConfig::default();
        let st = IterateState::initial(&problem, &p, &cfg, Variant::Bregman, Execution::Serial).unwrap();
        let m0 = cost_bound_m0(&problem).unwrap();
        let l2 = p.lambda2_abs().unwrap();
        let b = rate_bounds(Some(&cert), &st, &cfg, 10, m, n, m0, l2).unwrap();
        let closed = m as f64 * (n as f64).ln() / 10.0;
        assert!((b.instance_objective - closed).abs() < 1e-12);
        assert!((b.uniform_objective - closed).abs() < 1e-12);

        let b2 = rate_bounds(Some(&cert), &st, &cfg, 20, m, n, m0, l2).unwrap();
        for (a, h) in [(b.instance_objective, b2.instance_objective), (b.instance_consensus, b2.instance_consensus), (b.uniform_objective, b2.uniform_objective), (b.uniform_consensus, b2.uniform_consensus)] {
            assert!((a / 2.0 - h).abs() <= 1e-15 * a.abs());
        }
        // the instance bound on consensus is no weaker than the uniform one
        assert!(b.instance_consensus <= b.uniform_consensus);
    }

    #[test]
    fn missing_certificate() {
        let (problem, p, _) = setup(5, 3, 2);
        let cfg = SolverConfig::default();
        let st = IterateState::initial(&problem, &p, &cfg, Variant::Bregman, Execution::Serial).unwrap();
        assert!(matches!(
            rate_bounds(None, &st, &cfg, 1, 5, 3, 1.0, 0.5),
            Err(Error::MissingCertificate)
        ));
    }

    #[test]
    fn m0_is_largest_squared_norm() {
        let c = StackedPoint::from_blocks(&[vec![1.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let problem = ProblemInstance::linear(&c, FeasibleSet::ProbabilitySimplex).unwrap();
        assert_eq!(cost_bound_m0(&problem), Some(9.0));
    }
}
