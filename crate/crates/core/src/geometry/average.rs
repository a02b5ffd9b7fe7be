use super::mirror::{bregman_project_into, FeasibleSet, MirrorMap};
use super::stack::StackedPoint;
use crate::error::{Error, Result};
use crate::exec::{for_each_block, try_for_each_block, Execution};
use crate::graph::AveragingMatrix;

/// Mirror averaging: `y_i = argmin_{y ∈ X} Σ_j P_ij B_φ(y, x_j)`.
///
/// Computed as push → average in the dual space → pull → Bregman-project, i.e.
/// `y_i = Π^φ_X((∇φ)⁻¹(Σ_j P_ij ∇φ(x_j)))`. For the squared Euclidean map on
/// free space this is plain averaging `(P ⊗ I)x`; for negative entropy on the
/// simplex it is the normalized weighted geometric mean.
pub fn mirror_average(
    p: &AveragingMatrix,
    phi: MirrorMap,
    set: FeasibleSet,
    x: &StackedPoint,
    exec: Execution,
) -> Result<StackedPoint> {
    if p.m() != x.m() {
        return Err(Error::Dimension { expected: p.m(), got: x.m() });
    }
    let n = x.n();
    let mut pushed = x.clone();
    match phi {
        MirrorMap::SquaredEuclidean => {}
        MirrorMap::NegativeEntropy => {
            try_for_each_block(exec, pushed.data_mut(), n, |i, b| {
                for (k, v) in b.iter_mut().enumerate() {
                    if !(*v > 0.0) {
                        return Err(Error::OutsideDomain { index: i * n + k, value: *v });
                    }
                    *v = 1.0 + v.ln();
                }
                Ok(())
            })?;
        }
    }
    let mut y = StackedPoint::zeros(x.m(), n);
    let mut mixed = p.mix_stack(pushed.data(), n, exec);
    for_each_block(exec, &mut mixed, n, |_, theta| {
        if let MirrorMap::NegativeEntropy = phi {
            theta.iter_mut().for_each(|t| *t = (*t - 1.0).exp());
        }
    });
    if let (FeasibleSet::FreeSpace, _) = (set, phi) {
        return StackedPoint::from_data(x.m(), n, mixed);
    }
    for_each_block(exec, y.data_mut(), n, |i, out| {
        bregman_project_into(phi, set, &mixed[i * n..(i + 1) * n], out);
    });
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::bregman_divergence;
    use crate::graph::{build_laplacian_averaging, gen_erdos_renyi};
    use crate::rng::Stream;

    #[test]
    fn identity_matrix_is_a_fixed_point() {
        let mut rng = Stream::new(1);
        let blocks: Vec<Vec<f64>> = (0..4).map(|_| rng.simplex_point(5)).collect();
        let x = StackedPoint::from_blocks(&blocks).unwrap();
        let p = AveragingMatrix::identity(4);
        for phi in [MirrorMap::SquaredEuclidean, MirrorMap::NegativeEntropy] {
            let y = mirror_average(&p, phi, FeasibleSet::ProbabilitySimplex, &x, Execution::Serial).unwrap();
            assert!(y.max_abs_diff(&x) < 1e-15);
        }
    }

    #[test]
    fn euclidean_free_space_is_plain_averaging() {
        let g = gen_erdos_renyi(6, 0.5, 3).unwrap();
        let p = build_laplacian_averaging(&g).unwrap();
        let mut rng = Stream::new(2);
        let data: Vec<f64> = (0..18).map(|_| rng.standard_normal()).collect();
        let x = StackedPoint::from_data(6, 3, data).unwrap();
        let y = mirror_average(&p, MirrorMap::SquaredEuclidean, FeasibleSet::FreeSpace, &x, Execution::Serial)
            .unwrap();
        for i in 0..6 {
            for k in 0..3 {
                let want: f64 = (0..6).map(|j| p.get(i, j) * x.block(j)[k]).sum();
                assert!((y.block(i)[k] - want).abs() < 1e-14);
            }
        }
    }

    // Minimizes Σ_j P_ij KL(y, x_j) over the 2-simplex by golden-section
    // search on the first coordinate.
    fn numeric_entropy_average(weights: &[f64], xs: &[[f64; 2]]) -> [f64; 2] {
        let f = |t: f64| -> f64 {
            let y = [t, 1.0 - t];
            weights
                .iter()
                .zip(xs)
                .map(|(w, x)| w * (y[0] * (y[0] / x[0]).ln() + y[1] * (y[1] / x[1]).ln()))
                .sum()
        };
        let (mut a, mut b) = (1e-12, 1.0 - 1e-12);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let t = 0.5 * (a + b);
        [t, 1.0 - t]
    }

    #[test]
    fn entropy_average_on_k2() {
        let p = AveragingMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let x = StackedPoint::from_blocks(&[vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        let y = mirror_average(&p, MirrorMap::NegativeEntropy, FeasibleSet::ProbabilitySimplex, &x, Execution::Serial)
            .unwrap();
        let oracle = numeric_entropy_average(&[0.5, 0.5], &[[0.9, 0.1], [0.5, 0.5]]);
        for i in 0..2 {
            assert!((y.block(i)[0] - 0.75).abs() < 1e-12);
            assert!((y.block(i)[1] - 0.25).abs() < 1e-12);
            assert!((y.block(i)[0] - oracle[0]).abs() < 1e-6);
        }
        // sanity: the numeric objective really is minimized there
        let obj = |y: &[f64]| {
            0.5 * bregman_divergence(MirrorMap::NegativeEntropy, y, &[0.9, 0.1]).unwrap()
                + 0.5 * bregman_divergence(MirrorMap::NegativeEntropy, y, &[0.5, 0.5]).unwrap()
        };
        assert!(obj(&[0.75, 0.25]) <= obj(&[0.74, 0.26]));
        assert!(obj(&[0.75, 0.25]) <= obj(&[0.76, 0.24]));
    }

    #[test]
    fn entropy_rejects_zero_coordinates() {
        let p = AveragingMatrix::uniform(2);
        let x = StackedPoint::from_blocks(&[vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let r = mirror_average(&p, MirrorMap::NegativeEntropy, FeasibleSet::ProbabilitySimplex, &x, Execution::Serial);
        assert!(matches!(r, Err(Error::OutsideDomain { index: 1, .. })));
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let g = gen_erdos_renyi(10, 0.4, 5).unwrap();
        let p = build_laplacian_averaging(&g).unwrap();
        let mut rng = Stream::new(6);
        let blocks: Vec<Vec<f64>> = (0..10).map(|_| rng.simplex_point(40)).collect();
        let x = StackedPoint::from_blocks(&blocks).unwrap();
        for phi in [MirrorMap::SquaredEuclidean, MirrorMap::NegativeEntropy] {
            let set = FeasibleSet::ProbabilitySimplex;
            let a = mirror_average(&p, phi, set, &x, Execution::Serial).unwrap();
            let b = mirror_average(&p, phi, set, &x, Execution::Parallel).unwrap();
            assert_eq!(a, b);
        }
    }
}
