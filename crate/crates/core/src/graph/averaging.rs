use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::eigen::{jacobi_eigen, SymmetricEigen};
use super::{connected_components, Graph};
use crate::error::{Error, Result};
use crate::exec::{for_each_block, Execution};

pub const STOCHASTIC_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
/// Column width of the cache blocks used by [`AveragingMatrix::mix_stack`].
const MIX_CHUNK: usize = 512;
pub const LAMBDA1_TOL: f64 = 1e-10;

/// Eigen-decomposition of an averaging matrix, eigenpairs ordered by
/// nonincreasing magnitude.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigen: SymmetricEigen,
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.eigen.values
    }

    /// `|λ₂|`, the second largest eigenvalue magnitude (0 when `m == 1`).
    pub fn lambda2_abs(&self) -> f64 {
        self.eigen.values.get(1).map_or(0.0, |v| v.abs())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Dense symmetric matrix used for consensus averaging. Rows also keep a
/// sparse view of their nonzero entries (ascending column) so that products
/// with stacked points cost `O(nnz · n)`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct AveragingMatrix {
    m: usize,
    entries: Vec<f64>,
    nonzeros: Vec<Vec<(usize, f64)>>,
    spectrum: OnceLock<Spectrum>,
}

impl Clone for AveragingMatrix {
    fn clone(&self) -> Self {
        AveragingMatrix {
            m: self.m,
            entries: self.entries.clone(),
            nonzeros: self.nonzeros.clone(),
            spectrum: self.spectrum.clone(),
        }
    }
}

impl PartialEq for AveragingMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.entries == other.entries
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    m: usize,
    #[serde(serialize_with = "crate::serial::float_rows")]
    rows: Vec<Vec<f64>>,
}

impl TryFrom<MatrixJson> for AveragingMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.rows.len() != j.m {
            return Err(Error::Dimension { expected: j.m, got: j.rows.len() });
        }
        AveragingMatrix::from_rows(j.rows)
    }
}

impl From<AveragingMatrix> for MatrixJson {
    fn from(p: AveragingMatrix) -> Self {
        MatrixJson {
            m: p.m,
            rows: (0..p.m).map(|i| p.row(i).to_vec()).collect(),
        }
    }
}

impl AveragingMatrix {
    /// Wraps a square matrix without checking the averaging invariants; use
    /// [`validate_averaging`] for that.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::invalid("empty matrix"));
        }
        let mut entries = Vec::with_capacity(m * m);
        for r in &rows {
            if r.len() != m {
                return Err(Error::Dimension { expected: m, got: r.len() });
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("matrix entries must be finite"));
            }
            entries.extend_from_slice(r);
        }
        Ok(Self::from_entries(m, entries))
    }

    pub(crate) fn from_entries(m: usize, entries: Vec<f64>) -> Self {
        let nonzeros = (0..m)
            .map(|i| {
                (0..m)
                    .filter_map(|j| {
                        let w = entries[i * m + j];
                        (w != 0.0).then_some((j, w))
                    })
                    .collect()
            })
            .collect();
        AveragingMatrix {
            m,
            entries,
            nonzeros,
            spectrum: OnceLock::new(),
        }
    }

    /// Builds `P` from symmetric edge weights: `P_ij = P_ji = w_ij` on edges
    /// and `P_ii = 1 − Σ_j w_ij`.
    pub(crate) fn from_edge_weights(m: usize, edges: &[(usize, usize)], weights: &[f64]) -> Self {
        let mut entries = vec![0.0; m * m];
        for (&(i, j), &w) in edges.iter().zip(weights) {
            entries[i * m + j] = w;
            entries[j * m + i] = w;
        }
        for i in 0..m {
            let off: f64 = (0..m).filter(|&j| j != i).map(|j| entries[i * m + j]).sum();
            entries[i * m + i] = 1.0 - off;
        }
        Self::from_entries(m, entries)
    }

    pub fn identity(m: usize) -> Self {
        let mut e = vec![0.0; m * m];
        (0..m).for_each(|i| e[i * m + i] = 1.0);
        Self::from_entries(m, e)
    }

    /// `(1/m)·11ᵀ`, the complete-graph uniform averaging.
    pub fn uniform(m: usize) -> Self {
        Self::from_entries(m, vec![1.0 / m as f64; m * m])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.m..(i + 1) * self.m]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Nonzero `(j, P_ij)` pairs of row `i`, ascending in `j`.
    pub fn row_nonzeros(&self, i: usize) -> &[(usize, f64)] {
        &self.nonzeros[i]
    }

    /// `out = Σ_j P_ij · block_j(stack)` for a stack of `m` blocks of length
    /// `out.len()`, summing in ascending `j`.
    pub fn mix_block(&self, i: usize, stack: &[f64], out: &mut [f64]) {
        let n = out.len();
        out.fill(0.0);
        for &(j, w) in &self.nonzeros[i] {
            let src = &stack[j * n..(j + 1) * n];
            for (o, s) in out.iter_mut().zip(src) {
                *o += w * s;
            }
        }
    }

    /// `(P ⊗ I_n)·stack`. Each entry is summed in ascending `j` exactly as in
    /// [`mix_block`](Self::mix_block); serial execution walks column blocks so
    /// that the touched rows stay in cache.
    pub fn mix_stack(&self, stack: &[f64], n: usize, exec: Execution) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m * n];
        match exec {
            Execution::Serial => {
                let mut lo = 0;
                while lo < n {
                    let hi = (lo + MIX_CHUNK).min(n);
                    for i in 0..m {
                        let o = &mut out[i * n + lo..i * n + hi];
                        for &(j, w) in &self.nonzeros[i] {
                            let src = &stack[j * n + lo..j * n + hi];
                            for (a, b) in o.iter_mut().zip(src) {
                                *a += w * b;
                            }
                        }
                    }
                    lo = hi;
                }
            }
            Execution::Parallel => for_each_block(exec, &mut out, n, |i, o| self.mix_block(i, stack, o)),
        }
        out
    }

    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let mut eigen = jacobi_eigen(&self.entries, self.m)?;
        eigen.sort_by_magnitude();
        Ok(self.spectrum.get_or_init(|| Spectrum { eigen }))
    }

    pub fn lambda2_abs(&self) -> Result<f64> {
        Ok(self.spectrum()?.lambda2_abs())
    }

    /// `(P + I)/2`: keeps symmetry, stochasticity, and support, and maps the
    /// spectrum into `[0, 1]`.
    pub fn lazy(&self) -> Self {
        let m = self.m;
        let mut e: Vec<f64> = self.entries.iter().map(|x| 0.5 * x).collect();
        for i in 0..m {
            e[i * m + i] += 0.5;
        }
        Self::from_entries(m, e)
    }
}

/// `P = I − L/(2·d_max)` with `L` the combinatorial Laplacian.
pub fn build_laplacian_averaging(g: &Graph) -> Result<AveragingMatrix> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let m = g.m();
    if m == 1 {
        return Ok(AveragingMatrix::identity(1));
    }
    let alpha = 1.0 / (2.0 * g.max_degree() as f64);
    let edges: Vec<_> = g.edges().collect();
    Ok(AveragingMatrix::from_edge_weights(m, &edges, &vec![alpha; edges.len()]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Size of the worst violation (0 when the check passes cleanly).
    pub magnitude: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ValidityReport {
    pub checks: Vec<Check>,
}

impl ValidityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, passed: bool, magnitude: f64) {
        self.checks.push(Check { name, passed, magnitude });
    }
}

/// Checks every averaging-matrix invariant against `g`. Never fails; a
/// failed eigen-decomposition shows up as failed spectral checks.
pub fn validate_averaging(p: &AveragingMatrix, g: &Graph) -> ValidityReport {
    let mut report = ValidityReport::default();
    let m = p.m();
    if m != g.m() {
        report.push("dimension", false, m.abs_diff(g.m()) as f64);
        return report;
    }
    report.push("dimension", true, 0.0);

    let mut asym: f64 = 0.0;
    let mut negative: f64 = 0.0;
    let mut off_support: f64 = 0.0;
    let mut row_err: f64 = 0.0;
    for i in 0..m {
        row_err = row_err.max((p.row(i).iter().sum::<f64>() - 1.0).abs());
        for j in 0..m {
            let pij = p.get(i, j);
            asym = asym.max((pij - p.get(j, i)).abs());
            negative = negative.max(-pij);
            if i != j && pij > 0.0 && !g.has_edge(i, j) {
                off_support = off_support.max(pij);
            }
        }
    }
    report.push("symmetric", asym == 0.0, asym);
    report.push("stochastic", row_err <= STOCHASTIC_TOL, row_err);
    report.push("nonnegative", negative <= 0.0, negative.max(0.0));
    report.push("support", off_support == 0.0, off_support);

    let components = connected_components(m, |i| {
        p.row_nonzeros(i)
            .iter()
            .filter(move |&&(j, w)| j != i && w > 0.0)
            .map(|&(j, _)| j)
    });
    report.push("irreducible", components == 1, (components - 1) as f64);

    match p.spectrum() {
        Ok(s) => {
            let min = s.min_eigenvalue();
            report.push("psd", min >= -PSD_TOL, (-min).max(0.0));
            let l1 = s.values()[0];
            report.push("lambda1", (l1 - 1.0).abs() <= LAMBDA1_TOL, (l1 - 1.0).abs());
            let l2 = s.lambda2_abs();
            report.push("spectral_gap", m == 1 || l2 < 1.0, (l2 - 1.0).max(0.0));
        }
        Err(_) => {
            report.push("psd", false, f64::INFINITY);
            report.push("lambda1", false, f64::INFINITY);
            report.push("spectral_gap", false, f64::INFINITY);
        }
    }
    report
}
