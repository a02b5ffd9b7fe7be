//! Cyclic Jacobi eigen-decomposition for small dense symmetric matrices.

use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm at which the sweep loop stops, relative to
/// `max(1, ‖A‖_F)`.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix. `vectors` is row-major `m × m` with
/// eigenvector `k` stored in column `k`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub m: usize,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.vectors[i * self.m + k]).collect()
    }

    /// Reorders eigenpairs by nonincreasing magnitude, ties by larger value.
    pub fn sort_by_magnitude(&mut self) {
        let m = self.m;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            let (x, y) = (self.values[a], self.values[b]);
            y.abs().total_cmp(&x.abs()).then(y.total_cmp(&x))
        });
        let values = order.iter().map(|&k| self.values[k]).collect();
        let mut vectors = vec![0.0; m * m];
        for (new, &old) in order.iter().enumerate() {
            for i in 0..m {
                vectors[i * m + new] = self.vectors[i * m + old];
            }
        }
        self.values = values;
        self.vectors = vectors;
    }
}

fn off_diagonal_norm(a: &[f64], m: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                s += a[i * m + j] * a[i * m + j];
            }
        }
    }
    s.sqrt()
}

/// Decomposes the symmetric row-major matrix `a` (`m × m`). Only symmetric
/// input is meaningful; the rotations assume `a[i][j] == a[j][i]`.
pub fn jacobi_eigen(a: &[f64], m: usize) -> Result<SymmetricEigen> {
    assert_eq!(a.len(), m * m, "matrix must be m x m");
    let mut a = a.to_vec();
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let tol = JACOBI_TOLERANCE * scale;

    let mut off = off_diagonal_norm(&a, m);
    let mut sweeps = 0;
    while off > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNonConvergence { sweeps, off_norm: off });
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- A J
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                // A <- J^T A
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                a[p * m + q] = 0.0;
                a[q * m + p] = 0.0;
                for k in 0..m {
                    let vkp = v[k * m + p];
                    let vkq = v[k * m + q];
                    v[k * m + p] = c * vkp - s * vkq;
                    v[k * m + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a, m);
    }
    Ok(SymmetricEigen {
        values: (0..m).map(|i| a[i * m + i]).collect(),
        vectors: v,
        m,
    })
}
