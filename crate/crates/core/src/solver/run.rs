use std::time::Instant;

use super::config::SolverConfig;
use super::problem::ProblemInstance;
use super::step::{step_detailed, IterateState, Variant};
use crate::diagnostics::{
    bregman_terms, certificate_search, lyapunov_v, reference_solution, DiagnosticsRecord, ReferenceSolution,
    RunningAverage, SaddleCertificate,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{FeasibleSet, StackedPoint};
use crate::graph::AveragingMatrix;

/// Knobs of [`run_with`] that do not change the iterates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub execution: Execution,
    /// Compute a reference solution and, for linear costs on the simplex, a
    /// saddle certificate so that objective gaps and `V` are reported.
    pub certify: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { execution: Execution::Serial, certify: true }
    }
}

/// Everything a run produced. When an iteration fails, `records` and
/// `final_state` stop at the last completed iteration and `failure` holds the
/// error.
#[derive(Debug)]
pub struct RunTrace {
    pub variant: Variant,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: IterateState,
    pub reference: Option<ReferenceSolution>,
    pub certificate: Option<SaddleCertificate>,
    pub failure: Option<Error>,
}

impl RunTrace {
    /// First iteration `t ≥ 1` whose consensus residual is strictly below
    /// `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.records.iter().skip(1).find(|r| r.consensus_residual < threshold).map(|r| r.t)
    }
}

/// [`run_with`] under default options.
pub fn run(
    problem: &ProblemInstance,
    p: &AveragingMatrix,
    cfg: &SolverConfig,
    variant: Variant,
) -> Result<RunTrace> {
    run_with(problem, p, cfg, variant, &RunOptions::default())
}

/// Iterates from the default start until `max_iters` or until
/// `R(t+1) < stop_tol`, recording diagnostics after every iteration.
///
/// Invalid input is returned as `Err`; failures during the iteration end the
/// loop and are reported in [`RunTrace::failure`].
pub fn run_with(
    problem: &ProblemInstance,
    p: &AveragingMatrix,
    cfg: &SolverConfig,
    variant: Variant,
    opts: &RunOptions,
) -> Result<RunTrace> {
    let (m, n) = (problem.m(), problem.n());
    if p.m() != m {
        return Err(Error::Dimension { expected: m, got: p.m() });
    }
    let eff = variant.effective_config(cfg);
    match variant {
        Variant::Bregman => cfg.validate(m, n)?,
        Variant::Euclid => SolverConfig { strict: false, ..eff.clone() }.validate(m, n)?,
    }
    let exec = opts.execution;
    let clock = Instant::now();

    let (reference, certificate) = if opts.certify {
        attach_certificate(problem, p)?
    } else {
        (None, None)
    };
    let f_star = reference.as_ref().map(|r| r.value);

    let mut state = IterateState::initial(problem, p, cfg, variant, exec)?;
    let start_disagreement = super::disagreement(p, &state.x, exec).norm_sq();
    let v0 = certificate.as_ref().map(|c| lyapunov_v(&state, c, &eff)).transpose()?;
    let mut records = vec![DiagnosticsRecord {
        t: 0,
        objective_gap: f_star.map(|f| problem.objective(&state.x) - f),
        consensus_residual: 0.5 * start_disagreement,
        ergodic_consensus_residual: None,
        r: None,
        v: v0,
        wall_nanos: clock.elapsed().as_nanos() as u64,
    }];

    let mut primal_sum = RunningAverage::new(m, n);
    let mut disagreement_sum = RunningAverage::new(m, n);
    let mut failure = None;
    for _ in 0..cfg.max_iters {
        let step = match step_detailed(&state, problem, p, cfg, variant, exec) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let next = step.state;
        let q = step.disagreement.norm_sq();
        let measured = (|| -> Result<(f64, Option<f64>)> {
            let r = 0.5 * eff.gamma * q + bregman_terms(&next.x, &state.y, &state.x, &eff)?;
            let v = certificate.as_ref().map(|c| lyapunov_v(&next, c, &eff)).transpose()?;
            primal_sum.push(&next.x)?;
            disagreement_sum.push(&step.disagreement)?;
            Ok((r, v))
        })();
        let (r, v) = match measured {
            Ok(rv) => rv,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let k = primal_sum.count() as f64;
        let objective_gap = f_star.map(|f| ergodic_objective(problem, primal_sum.sum(), k) - f);
        let ergodic_q: f64 = disagreement_sum.sum().data().iter().map(|d| (d / k) * (d / k)).sum();
        records.push(DiagnosticsRecord {
            t: next.t,
            objective_gap,
            consensus_residual: 0.5 * q,
            ergodic_consensus_residual: Some(0.5 * ergodic_q),
            r: Some(r),
            v,
            wall_nanos: clock.elapsed().as_nanos() as u64,
        });
        state = next;
        if r < cfg.stop_tol {
            break;
        }
    }
    Ok(RunTrace { variant, records, final_state: state, reference, certificate, failure })
}

/// `Σ_i f_i(S_i / k)`.
fn ergodic_objective(problem: &ProblemInstance, sum: &StackedPoint, k: f64) -> f64 {
    let mut total = 0.0;
    let mut block = vec![0.0; problem.n()];
    for (f, s) in problem.objectives().iter().zip(sum.blocks()) {
        total += match f.as_linear() {
            Some(c) => super::dot(c, s) / k,
            None => {
                block.iter_mut().zip(s).for_each(|(b, v)| *b = v / k);
                f.value(&block)
            }
        };
    }
    total
}

fn attach_certificate(
    problem: &ProblemInstance,
    p: &AveragingMatrix,
) -> Result<(Option<ReferenceSolution>, Option<SaddleCertificate>)> {
    let linear = problem.linear_costs().is_some();
    if linear && problem.set() == FeasibleSet::FreeSpace {
        return Ok((None, None));
    }
    let reference = reference_solution(problem)?;
    let certificate = if linear {
        let x_star = StackedPoint::consensus(problem.m(), &reference.block);
        Some(certificate_search(problem, p, &x_star)?)
    } else {
        None
    };
    Ok((Some(reference), certificate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian_averaging, gen_erdos_renyi};
    use crate::rng::Stream;

    fn instance(m: usize, n: usize, seed: u64) -> (ProblemInstance, AveragingMatrix) {
        let g = gen_erdos_renyi(m, 0.3, seed).unwrap();
        let p = build_laplacian_averaging(&g).unwrap();
        let mut s = Stream::new(seed ^ 0xff);
        let c = StackedPoint::from_data(m, n, (0..m * n).map(|_| s.standard_normal()).collect()).unwrap();
        (ProblemInstance::linear(&c, FeasibleSet::ProbabilitySimplex).unwrap(), p)
    }

    #[test]
    fn zero_iterations_give_initial_record() {
        let (problem, p) = instance(6, 4, 1);
        let cfg = SolverConfig { max_iters: 0, ..SolverConfig::default() };
        let tr = run(&problem, &p, &cfg, Variant::Bregman).unwrap();
        assert_eq!(tr.records.len(), 1);
        assert_eq!(tr.records[0].t, 0);
        assert!(tr.records[0].r.is_none());
        assert!(tr.records[0].v.is_some());
    }

    #[test]
    fn infinite_tolerance_stops_after_one() {
        let (problem, p) = instance(6, 4, 2);
        let cfg = SolverConfig { stop_tol: f64::INFINITY, ..SolverConfig::default() };
        let tr = run(&problem, &p, &cfg, Variant::Bregman).unwrap();
        assert_eq!(tr.records.len(), 2);
        assert_eq!(tr.final_state.t, 1);
    }

    #[test]
    fn strict_mode_rejects_bad_parameters() {
        let (problem, p) = instance(5, 3, 3);
        let cfg = SolverConfig { tau: 0.9, ..SolverConfig::default() };
        assert!(matches!(run(&problem, &p, &cfg, Variant::Bregman), Err(Error::ParameterRule(_))));
        // the Euclidean engine ignores tau
        run(&problem, &p, &SolverConfig { max_iters: 3, ..cfg }, Variant::Euclid).unwrap();
    }

    #[test]
    fn descent_and_bounds_on_small_instance() {
        let (problem, p) = instance(10, 8, 4);
        let cfg = SolverConfig { max_iters: 300, ..SolverConfig::default() };
        let tr = run(&problem, &p, &cfg, Variant::Bregman).unwrap();
        assert!(tr.failure.is_none());
        let v0 = tr.records[0].v.unwrap();
        let mut partial = 0.0;
        for w in tr.records.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let r = b.r.unwrap();
            assert!(r >= -1e-12);
            assert!(a.v.unwrap() - b.v.unwrap() - r >= -1e-8 * a.v.unwrap().max(1.0));
            partial += r;
            assert!(partial <= v0 + 1e-6);
        }
    }

    #[test]
    fn parallel_run_is_bitwise_serial() {
        let (problem, p) = instance(12, 6, 5);
        let cfg = SolverConfig { max_iters: 30, ..SolverConfig::default() };
        let a = run(&problem, &p, &cfg, Variant::Bregman).unwrap();
        let opts = RunOptions { execution: Execution::Parallel, certify: true };
        let b = run_with(&problem, &p, &cfg, Variant::Bregman, &opts).unwrap();
        assert_eq!(a.final_state, b.final_state);
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!((x.objective_gap, x.consensus_residual, x.r, x.v), (y.objective_gap, y.consensus_residual, y.r, y.v));
        }
    }
}
