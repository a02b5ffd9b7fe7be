use serde::{Deserialize, Serialize};

use super::simplex::euclidean_simplex_projection;
use crate::error::{Error, Result};

/// Smallest coordinate kept by entropy iterates; values that underflow below
/// it are raised to it so that `ln` stays finite.
pub const ENTROPY_FLOOR: f64 = 1e-300;

/// Tolerance on the coordinate sum for simplex membership.
pub const SIMPLEX_SUM_TOL: f64 = 1e-10;

/// Differentiable strictly convex potential `φ` generating a Bregman
/// divergence.
///
/// * `SquaredEuclidean`: `φ(u) = ½‖u‖₂²` on all of `ℝⁿ`; 1-strongly convex
///   w.r.t. `ℓ₂`.
/// * `NegativeEntropy`: `φ(u) = Σ u_k ln u_k` on the positive orthant;
///   1-strongly convex w.r.t. `ℓ₁` on the simplex (Pinsker).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorMap {
    SquaredEuclidean,
    NegativeEntropy,
}

impl MirrorMap {
    /// Strong-convexity modulus `μ`.
    pub fn modulus(self) -> f64 {
        1.0
    }

    /// Index `p` of the norm in the strong-convexity statement.
    pub fn norm_index(self) -> f64 {
        match self {
            MirrorMap::SquaredEuclidean => 2.0,
            MirrorMap::NegativeEntropy => 1.0,
        }
    }

    /// `σ = min{1, n^{2/p − 1}}`.
    pub fn sigma(self, n: usize) -> f64 {
        norm_ratio(self.norm_index(), n)
    }

    pub fn in_domain(self, u: &[f64]) -> bool {
        match self {
            MirrorMap::SquaredEuclidean => u.iter().all(|x| x.is_finite()),
            MirrorMap::NegativeEntropy => u.iter().all(|&x| x > 0.0 && x.is_finite()),
        }
    }

    /// `φ(u)`, defined on the closure of the domain (`0 ln 0 = 0`).
    pub fn value(self, u: &[f64]) -> Result<f64> {
        match self {
            MirrorMap::SquaredEuclidean => Ok(0.5 * u.iter().map(|x| x * x).sum::<f64>()),
            MirrorMap::NegativeEntropy => {
                let mut s = 0.0;
                for (k, &x) in u.iter().enumerate() {
                    if x < 0.0 || !x.is_finite() {
                        return Err(Error::OutsideDomain { index: k, value: x });
                    }
                    if x > 0.0 {
                        s += x * x.ln();
                    }
                }
                Ok(s)
            }
        }
    }
}

/// `σ = min{1, n^{2/p − 1}}`, with `p = ∞` allowed.
pub fn norm_ratio(p: f64, n: usize) -> f64 {
    let exponent = if p.is_infinite() { -1.0 } else { 2.0 / p - 1.0 };
    (n as f64).powf(exponent).min(1.0)
}

fn check_domain(phi: MirrorMap, v: &[f64]) -> Result<()> {
    if let MirrorMap::NegativeEntropy = phi {
        if let Some((k, &x)) = v.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite())) {
            return Err(Error::OutsideDomain { index: k, value: x });
        }
    }
    Ok(())
}

/// `B_φ(u, v) = φ(u) − φ(v) − ⟨∇φ(v), u − v⟩`. `u` may lie on the boundary of
/// the domain, `v` must be inside it.
pub fn bregman_divergence(phi: MirrorMap, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension { expected: u.len(), got: v.len() });
    }
    check_domain(phi, v)?;
    match phi {
        MirrorMap::SquaredEuclidean => {
            Ok(0.5 * u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        }
        MirrorMap::NegativeEntropy => {
            let mut s = 0.0;
            for (k, (&a, &b)) in u.iter().zip(v).enumerate() {
                if a < 0.0 || !a.is_finite() {
                    return Err(Error::OutsideDomain { index: k, value: a });
                }
                s += if a > 0.0 { a * (a / b).ln() - a + b } else { b };
            }
            Ok(s)
        }
    }
}

/// `∇φ(x)`.
pub fn mirror_push(phi: MirrorMap, x: &[f64]) -> Result<Vec<f64>> {
    check_domain(phi, x)?;
    Ok(match phi {
        MirrorMap::SquaredEuclidean => x.to_vec(),
        MirrorMap::NegativeEntropy => x.iter().map(|v| 1.0 + v.ln()).collect(),
    })
}

/// `(∇φ)⁻¹(θ)`.
pub fn mirror_pull(phi: MirrorMap, theta: &[f64]) -> Vec<f64> {
    match phi {
        MirrorMap::SquaredEuclidean => theta.to_vec(),
        MirrorMap::NegativeEntropy => theta.iter().map(|t| (t - 1.0).exp()).collect(),
    }
}

/// Closed convex constraint set shared by all vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibleSet {
    FreeSpace,
    ProbabilitySimplex,
}

impl FeasibleSet {
    pub fn contains(self, x: &[f64]) -> bool {
        match self {
            FeasibleSet::FreeSpace => true,
            FeasibleSet::ProbabilitySimplex => {
                x.iter().all(|&v| v >= 0.0) && (x.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_SUM_TOL
            }
        }
    }
}

/// `argmin_{x ∈ X} B_φ(x, z)`, written into `out`.
pub(crate) fn bregman_project_into(phi: MirrorMap, set: FeasibleSet, z: &[f64], out: &mut [f64]) {
    match (set, phi) {
        (FeasibleSet::FreeSpace, _) => out.copy_from_slice(z),
        (FeasibleSet::ProbabilitySimplex, MirrorMap::NegativeEntropy) => {
            let s: f64 = z.iter().sum();
            out.iter_mut().zip(z).for_each(|(o, v)| *o = v / s);
        }
        (FeasibleSet::ProbabilitySimplex, MirrorMap::SquaredEuclidean) => {
            out.copy_from_slice(&euclidean_simplex_projection(z));
        }
    }
}

/// `argmin_{x ∈ X} B_φ(x, z)` for `z` in the domain of `φ`.
pub fn bregman_project(phi: MirrorMap, set: FeasibleSet, z: &[f64]) -> Result<Vec<f64>> {
    check_domain(phi, z)?;
    let mut out = vec![0.0; z.len()];
    bregman_project_into(phi, set, z, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn squared_euclidean_divergence_is_half_distance() {
        let b = bregman_divergence(MirrorMap::SquaredEuclidean, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(b, 1.0);
    }

    #[test]
    fn entropy_divergence_vanishes_on_diagonal() {
        let u = [0.3, 0.7];
        assert_eq!(bregman_divergence(MirrorMap::NegativeEntropy, &u, &u).unwrap(), 0.0);
    }

    // KL(u‖v) for probability vectors, written independently of φ.
    fn kl(u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).ln()).sum()
    }

    #[test]
    fn entropy_divergence_is_kl_on_simplex() {
        let (u, v) = ([0.5, 0.5], [0.9, 0.1]);
        let want = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
        assert!((kl(&u, &v) - want).abs() < 1e-15);
        let got = bregman_divergence(MirrorMap::NegativeEntropy, &u, &v).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn entropy_divergence_from_definition() {
        let mut rng = Stream::new(2);
        for _ in 0..200 {
            let u: Vec<f64> = (0..5).map(|_| rng.uniform_in(0.01, 2.0)).collect();
            let v: Vec<f64> = (0..5).map(|_| rng.uniform_in(0.01, 2.0)).collect();
            let phi = MirrorMap::NegativeEntropy;
            let grad = mirror_push(phi, &v).unwrap();
            let def = phi.value(&u).unwrap()
                - phi.value(&v).unwrap()
                - grad.iter().zip(u.iter().zip(&v)).map(|(g, (a, b))| g * (a - b)).sum::<f64>();
            let b = bregman_divergence(phi, &u, &v).unwrap();
            assert!((def - b).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_rejects_boundary_second_argument() {
        let r = bregman_divergence(MirrorMap::NegativeEntropy, &[0.5, 0.5], &[1.0, 0.0]);
        assert!(matches!(r, Err(Error::OutsideDomain { index: 1, .. })));
        // first argument may sit on the boundary
        let b = bregman_divergence(MirrorMap::NegativeEntropy, &[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((b - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn push_and_pull() {
        let u = [0.2, 0.3, 0.5];
        let e = MirrorMap::SquaredEuclidean;
        assert_eq!(mirror_push(e, &u).unwrap(), u.to_vec());
        assert_eq!(mirror_pull(e, &u), u.to_vec());
        let h = MirrorMap::NegativeEntropy;
        assert_eq!(mirror_pull(h, &[1.0; 4]), vec![1.0; 4]);
        let back = mirror_pull(h, &mirror_push(h, &u).unwrap());
        for (a, b) in back.iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(mirror_push(h, &[0.5, 0.0]).is_err());
        assert!(mirror_push(h, &[0.5, -1.0]).is_err());
    }

    #[test]
    fn projections() {
        let h = MirrorMap::NegativeEntropy;
        let y = bregman_project(h, FeasibleSet::ProbabilitySimplex, &[0.5, 1.0 / 6.0]).unwrap();
        assert!((y[0] - 0.75).abs() < 1e-15 && (y[1] - 0.25).abs() < 1e-15);
        let z = [3.0, -2.0, 0.1];
        let e = MirrorMap::SquaredEuclidean;
        assert_eq!(bregman_project(e, FeasibleSet::FreeSpace, &z).unwrap(), z.to_vec());
        let y = bregman_project(e, FeasibleSet::ProbabilitySimplex, &[0.5, 0.5, 1.0]).unwrap();
        let want = [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0];
        for (a, b) in y.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_values() {
        assert_eq!(MirrorMap::SquaredEuclidean.sigma(10), 1.0);
        assert_eq!(MirrorMap::NegativeEntropy.sigma(10), 1.0);
        assert_eq!(norm_ratio(f64::INFINITY, 4), 0.25);
        assert!((norm_ratio(4.0, 16) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn simplex_membership() {
        assert!(FeasibleSet::ProbabilitySimplex.contains(&[0.25, 0.75]));
        assert!(!FeasibleSet::ProbabilitySimplex.contains(&[0.5, 0.6]));
        assert!(!FeasibleSet::ProbabilitySimplex.contains(&[1.5, -0.5]));
        assert!(FeasibleSet::FreeSpace.contains(&[1e9, -3.0]));
    }
}
