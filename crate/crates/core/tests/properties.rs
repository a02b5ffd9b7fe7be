use bregman_pdmm::geometry::{bregman_divergence, mirror_push, FeasibleSet, MirrorMap, StackedPoint};
use bregman_pdmm::graph::{build_laplacian_averaging, gen_erdos_renyi, AveragingMatrix};
use bregman_pdmm::rng::Stream;
use bregman_pdmm::solver::{bregman_pdmm_step, IterateState, ProblemInstance, SolverConfig, Variant};
use bregman_pdmm::Execution;
use proptest::prelude::*;

fn interior_point(seed: u64, n: usize) -> Vec<f64> {
    let mut s = Stream::new(seed);
    let v: Vec<f64> = s.simplex_point(n).iter().map(|x| x + 1e-3).collect();
    let t: f64 = v.iter().sum();
    v.iter().map(|x| x / t).collect()
}

fn maps() -> impl Strategy<Value = MirrorMap> {
    prop_oneof![Just(MirrorMap::SquaredEuclidean), Just(MirrorMap::NegativeEntropy)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// ⟨∇φ(a) − ∇φ(b), c − a⟩ = B(c, b) − B(c, a) − B(a, b)
    #[test]
    fn three_point_identity(phi in maps(), n in 2usize..12, sa: u64, sb: u64, sc: u64) {
        let (a, b, c) = (interior_point(sa, n), interior_point(sb, n), interior_point(sc, n));
        let ga = mirror_push(phi, &a).unwrap();
        let gb = mirror_push(phi, &b).unwrap();
        let lhs: f64 = (0..n).map(|k| (ga[k] - gb[k]) * (c[k] - a[k])).sum();
        let rhs = bregman_divergence(phi, &c, &b).unwrap()
            - bregman_divergence(phi, &c, &a).unwrap()
            - bregman_divergence(phi, &a, &b).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    /// B_φ(u, v) ≥ (μ/2)‖u − v‖_p² on the simplex (Pinsker for entropy).
    #[test]
    fn strong_convexity(phi in maps(), n in 2usize..12, su: u64, sv: u64) {
        let (u, v) = (interior_point(su, n), interior_point(sv, n));
        let p = phi.norm_index();
        let norm = u.iter().zip(&v).map(|(a, b)| (a - b).abs().powf(p)).sum::<f64>().powf(1.0 / p);
        let b = bregman_divergence(phi, &u, &v).unwrap();
        prop_assert!(b - 0.5 * phi.modulus() * norm * norm >= -1e-12);
    }

    /// Relabeling the vertices relabels every iterate.
    #[test]
    fn relabeling_equivariance(seed in 0u64..500, m in 3usize..8, n in 2usize..6) {
        let g = gen_erdos_renyi(m, 0.6, seed).unwrap();
        let p = build_laplacian_averaging(&g).unwrap();
        let mut s = Stream::new(seed + 1);
        let mut perm: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            perm.swap(i, s.index(i + 1));
        }
        let costs: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| s.standard_normal()).collect()).collect();
        // vertex perm[i] of the relabeled instance is vertex i of the original
        let mut rows = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                rows[perm[i]][perm[j]] = p.get(i, j);
            }
        }
        let q = AveragingMatrix::from_rows(rows).unwrap();
        let mut relabeled = vec![vec![]; m];
        for i in 0..m {
            relabeled[perm[i]] = costs[i].clone();
        }
        let pa = ProblemInstance::linear(&StackedPoint::from_blocks(&costs).unwrap(), FeasibleSet::ProbabilitySimplex).unwrap();
        let pb = ProblemInstance::linear(&StackedPoint::from_blocks(&relabeled).unwrap(), FeasibleSet::ProbabilitySimplex).unwrap();
        let cfg = SolverConfig::default();
        let mut a = IterateState::initial(&pa, &p, &cfg, Variant::Bregman, Execution::Serial).unwrap();
        let mut b = IterateState::initial(&pb, &q, &cfg, Variant::Bregman, Execution::Serial).unwrap();
        for _ in 0..20 {
            a = bregman_pdmm_step(&a, &pa, &p, &cfg, Execution::Serial).unwrap();
            b = bregman_pdmm_step(&b, &pb, &q, &cfg, Execution::Serial).unwrap();
        }
        for i in 0..m {
            for (u, v) in a.x.block(i).iter().zip(b.x.block(perm[i])) {
                prop_assert!((u - v).abs() < 1e-12);
            }
            for (u, v) in a.nu.block(i).iter().zip(b.nu.block(perm[i])) {
                prop_assert!((u - v).abs() < 1e-10);
            }
        }
    }

    /// Iterates stay on the simplex and the duals keep a zero block sum.
    #[test]
    fn feasibility_and_dual_conservation(seed in 0u64..500, delta in 0.0f64..2.0, euclid: bool) {
        let (m, n) = (6, 5);
        let g = gen_erdos_renyi(m, 0.5, seed).unwrap();
        let p = build_laplacian_averaging(&g).unwrap();
        let mut s = Stream::new(seed);
        let c = StackedPoint::from_data(m, n, (0..m * n).map(|_| s.standard_normal()).collect()).unwrap();
        let problem = ProblemInstance::linear(&c, FeasibleSet::ProbabilitySimplex).unwrap();
        let mirror = if euclid { MirrorMap::SquaredEuclidean } else { MirrorMap::NegativeEntropy };
        let cfg = SolverConfig { mirror, delta: bregman_pdmm::solver::Delta::Scalar(delta), ..SolverConfig::default() };
        let mut st = IterateState::initial(&problem, &p, &cfg, Variant::Bregman, Execution::Serial).unwrap();
        for _ in 0..30 {
            st = bregman_pdmm_step(&st, &problem, &p, &cfg, Execution::Serial).unwrap();
            for b in st.x.blocks() {
                prop_assert!(FeasibleSet::ProbabilitySimplex.contains(b));
            }
            prop_assert!(st.nu.block_sum().iter().all(|v| v.abs() < 1e-8));
        }
    }
}
