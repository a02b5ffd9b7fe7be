//! Optimality measures of a run: consensus residual, the residual `R`, the
//! Lyapunov function `V`, ergodic averages, saddle certificates, and the
//! a-priori rate bounds.

mod bounds;
mod certificate;
mod record;
mod reference;

pub use bounds::{cost_bound_m0, rate_bounds, RateBounds};
pub use certificate::{certificate_search, SaddleCertificate, KKT_TOLERANCE, PINV_ZERO_TOL};
pub use record::{read_csv, write_csv, write_csv_to, DiagnosticsRecord, CSV_HEADER};
pub use reference::{reference_solution, ReferenceSolution, CENTRAL_SOLVE_ITERS};


use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{bregman_divergence, StackedPoint};
use crate::graph::AveragingMatrix;
use crate::solver::{disagreement, IterateState, SolverConfig};

/// `½‖((I − P) ⊗ I)x‖²`.
pub fn consensus_residual(x: &StackedPoint, p: &AveragingMatrix) -> f64 {
    0.5 * disagreement(p, x, Execution::Serial).norm_sq()
}

/// `Σ_i B_φ(x_i⁺, y_i) + Σ_i (δ_i/ρ) B_{φ_i}(x_i⁺, x_i)`.
pub(crate) fn bregman_terms(
    x_next: &StackedPoint,
    y: &StackedPoint,
    x: &StackedPoint,
    cfg: &SolverConfig,
) -> Result<f64> {
    let prox = cfg.prox_map();
    let mut s = 0.0;
    for i in 0..x_next.m() {
        s += bregman_divergence(cfg.mirror, x_next.block(i), y.block(i))?;
        let d = cfg.delta.get(i);
        if d > 0.0 {
            s += d / cfg.rho * bregman_divergence(prox, x_next.block(i), x.block(i))?;
        }
    }
    Ok(s)
}

/// `R(t+1) = (γ/2)‖((I − P) ⊗ I)x⁺‖² + Σ B_φ(x_i⁺, y_i) + Σ (δ_i/ρ) B_{φ_i}(x_i⁺, x_i)`
/// for consecutive states `state` (at `t`) and `next` (at `t + 1`).
///
/// `cfg` must be the configuration the engine actually ran with; see
/// [`Variant::effective_config`](crate::solver::Variant::effective_config).
pub fn residual_r(
    state: &IterateState,
    next: &IterateState,
    p: &AveragingMatrix,
    cfg: &SolverConfig,
) -> Result<f64> {
    let q = disagreement(p, &next.x, Execution::Serial).norm_sq();
    Ok(0.5 * cfg.gamma * q + bregman_terms(&next.x, &state.y, &state.x, cfg)?)
}

/// `V(t) = ‖ν⋆ − ν‖²/(2τρ) + Σ B_φ(x_i⋆, y_i) + Σ (δ_i/ρ) B_{φ_i}(x_i⋆, x_i)`.
pub fn lyapunov_v(state: &IterateState, cert: &SaddleCertificate, cfg: &SolverConfig) -> Result<f64> {
    state.nu.same_shape(&cert.nu_star)?;
    let dual: f64 = cert.nu_star.data().iter().zip(state.nu.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(dual / (2.0 * cfg.tau * cfg.rho) + bregman_terms(&cert.x_star, &state.y, &state.x, cfg)?)
}

/// `(1/T) Σ_{t=1}^{T} x⁽ᵗ⁾` over `iterates[0..T]`, which hold `x⁽¹⁾, …, x⁽ᵀ⁾`.
pub fn ergodic_average(iterates: &[StackedPoint], t: usize) -> Result<StackedPoint> {
    if t == 0 || t > iterates.len() {
        return Err(Error::invalid(format!("need 1 <= T <= {}, got {t}", iterates.len())));
    }
    let mut avg = RunningAverage::new(iterates[0].m(), iterates[0].n());
    for x in &iterates[..t] {
        avg.push(x)?;
    }
    Ok(avg.mean())
}

/// Running sum of stacked points with their count.
#[derive(Clone, Debug)]
pub struct RunningAverage {
    sum: StackedPoint,
    count: usize,
}

impl RunningAverage {
    pub fn new(m: usize, n: usize) -> Self {
        RunningAverage { sum: StackedPoint::zeros(m, n), count: 0 }
    }

    pub fn push(&mut self, x: &StackedPoint) -> Result<()> {
        self.sum.same_shape(x)?;
        self.sum.data_mut().iter_mut().zip(x.data()).for_each(|(s, v)| *s += v);
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn sum(&self) -> &StackedPoint {
        &self.sum
    }

    pub fn mean(&self) -> StackedPoint {
        let k = self.count.max(1) as f64;
        let mut out = self.sum.clone();
        out.data_mut().iter_mut().for_each(|v| *v /= k);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FeasibleSet, MirrorMap};
    use crate::graph::{build_laplacian_averaging, gen_erdos_renyi};
    use crate::rng::Stream;
    use crate::solver::{bregman_pdmm_step, Delta, IterateState, ProblemInstance, Variant};

    fn random_stack(s: &mut Stream, m: usize, n: usize) -> StackedPoint {
        StackedPoint::from_data(m, n, (0..m * n).map(|_| s.standard_normal()).collect()).unwrap()
    }

    fn kl(u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).map(|(a, b)| if *a == 0.0 { *b } else { a * (a / b).ln() - a + b }).sum()
    }

    #[test]
    fn consensus_residual_examples() {
        let p = AveragingMatrix::uniform(2);
        let x = StackedPoint::from_blocks(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((consensus_residual(&x, &p) - 0.5).abs() < 1e-15);
        assert_eq!(consensus_residual(&StackedPoint::consensus(2, &[3.0, 4.0]), &p), 0.0);

        let mut s = Stream::new(1);
        let x = random_stack(&mut s, 6, 3);
        let p = AveragingMatrix::uniform(6);
        let mean: Vec<f64> = x.block_sum().iter().map(|v| v / 6.0).collect();
        let want: f64 =
            0.5 * x.blocks().map(|b| b.iter().zip(&mean).map(|(a, m)| (a - m) * (a - m)).sum::<f64>()).sum::<f64>();
        assert!((consensus_residual(&x, &p) - want).abs() < 1e-12);
    }

    #[test]
    fn residual_matches_definition() {
        let g = gen_erdos_renyi(7, 0.5, 3).unwrap();
        let p = build_laplacian_averaging(&g).unwrap();
        let mut s = Stream::new(12);
        let c = random_stack(&mut s, 7, 4);
        let problem = ProblemInstance::linear(&c, FeasibleSet::ProbabilitySimplex).unwrap();
        let deltas: Vec<f64> = (0..7).map(|i| 0.1 * i as f64).collect();
        let cfg = SolverConfig { delta: Delta::PerVertex(deltas.clone()), ..SolverConfig::default() };
        let st = IterateState::initial(&problem, &p, &cfg, Variant::Bregman, Execution::Serial).unwrap();
        let st = bregman_pdmm_step(&st, &problem, &p, &cfg, Execution::Serial).unwrap();
        let nx = bregman_pdmm_step(&st, &problem, &p, &cfg, Execution::Serial).unwrap();

        // dense quadratic form and raw KL sums
        let m = 7;
        let n = 4;
        let mut q = 0.0;
        for k in 0..n {
            for i in 0..m {
                let mut r = nx.x.block(i)[k];
                for j in 0..m {
                    r -= p.get(i, j) * nx.x.block(j)[k];
                }
                q += r * r;
            }
        }
        let mut want = 0.5 * cfg.gamma * q;
        for i in 0..m {
            want += kl(nx.x.block(i), st.y.block(i));
            want += deltas[i] / cfg.rho * kl(nx.x.block(i), st.x.block(i));
        }
        let got = residual_r(&st, &nx, &p, &cfg).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        assert!(got >= 0.0);
    }

    #[test]
    fn residual_vanishes_at_stationary_consensus() {
        let p = AveragingMatrix::uniform(3);
        let u = [0.2, 0.8];
        let st = IterateState {
            t: 0,
            x: StackedPoint::consensus(3, &u),
            y: StackedPoint::consensus(3, &u),
            nu: StackedPoint::zeros(3, 2),
        };
        let cfg = SolverConfig { delta: Delta::Scalar(1.0), ..SolverConfig::default() };
        assert!(residual_r(&st, &st, &p, &cfg).unwrap().abs() < 1e-15);
    }

    #[test]
    fn lyapunov_matches_definition() {
        let mut s = Stream::new(5);
        let (m, n) = (4, 3);
        let x_star = StackedPoint::consensus(m, &[0.0, 1.0, 0.0]);
        let cert = SaddleCertificate {
            x_star: x_star.clone(),
            nu_star: random_stack(&mut s, m, n),
            g: StackedPoint::zeros(m, n),
            residual_kkt: 0.0,
            vertex: 1,
        };
        let blocks = |s: &mut Stream| (0..m).map(|_| s.simplex_point(n)).collect::<Vec<_>>();
        let st = IterateState {
            t: 3,
            x: StackedPoint::from_blocks(&blocks(&mut s)).unwrap(),
            y: StackedPoint::from_blocks(&blocks(&mut s)).unwrap(),
            nu: random_stack(&mut s, m, n),
        };
        let cfg = SolverConfig { delta: Delta::Scalar(0.3), ..SolverConfig::default() };
        let mut want = 0.0;
        for (a, b) in cert.nu_star.data().iter().zip(st.nu.data()) {
            want += (a - b) * (a - b);
        }
        want /= 2.0 * cfg.tau * cfg.rho;
        for i in 0..m {
            want += kl(x_star.block(i), st.y.block(i)) + 0.3 / cfg.rho * kl(x_star.block(i), st.x.block(i));
        }
        assert!((lyapunov_v(&st, &cert, &cfg).unwrap() - want).abs() < 1e-12);

        // dual term vanishes at ν = ν⋆
        let at_dual = IterateState { nu: cert.nu_star.clone(), ..st.clone() };
        let v = lyapunov_v(&at_dual, &cert, &cfg).unwrap();
        let primal = bregman_terms(&x_star, &st.y, &st.x, &cfg).unwrap();
        assert!((v - primal).abs() < 1e-15);

        // zero at the saddle point itself (a simplex vertex lies outside the
        // entropy domain, so use the Euclidean map there)
        let euclid = SolverConfig { mirror: MirrorMap::SquaredEuclidean, ..cfg.clone() };
        let at_star = IterateState { t: 0, x: x_star.clone(), y: x_star.clone(), nu: cert.nu_star.clone() };
        assert_eq!(lyapunov_v(&at_star, &cert, &euclid).unwrap(), 0.0);
        assert!(lyapunov_v(&at_star, &cert, &cfg).is_err());
        assert!(lyapunov_v(&st, &cert, &euclid).unwrap() > 0.0);
    }

    #[test]
    fn ergodic_average_examples() {
        let a = StackedPoint::from_blocks(&[vec![1.0, 0.0]]).unwrap();
        let b = StackedPoint::from_blocks(&[vec![0.0, 1.0]]).unwrap();
        assert_eq!(ergodic_average(&[a.clone(), b], 2).unwrap().data(), &[0.5, 0.5]);
        assert_eq!(ergodic_average(&[a.clone(), a.clone(), a.clone()], 3).unwrap(), a);
        assert!(ergodic_average(&[a], 2).is_err());
    }

    #[test]
    fn running_mean_equals_two_pass_mean() {
        let mut s = Stream::new(77);
        let trace: Vec<StackedPoint> = (0..40).map(|_| random_stack(&mut s, 3, 5)).collect();
        let mut run = RunningAverage::new(3, 5);
        for (t, x) in trace.iter().enumerate() {
            run.push(x).unwrap();
            let mut batch = vec![0.0; 15];
            for y in &trace[..=t] {
                for (b, v) in batch.iter_mut().zip(y.data()) {
                    *b += v;
                }
            }
            let k = (t + 1) as f64;
            for (a, b) in run.mean().data().iter().zip(&batch) {
                assert!((a - b / k).abs() < 1e-12);
            }
        }
    }
}
