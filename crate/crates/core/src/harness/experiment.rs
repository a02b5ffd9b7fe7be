use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::write_csv;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{FeasibleSet, StackedPoint};
use crate::graph::{build_laplacian_averaging, gen_erdos_renyi, optimize_averaging_matrix, AveragingMatrix, Graph};
use crate::rng::Stream;
use crate::solver::{run_with, ProblemInstance, RunOptions, RunTrace, SolverConfig, Variant};

/// Consensus-residual levels reported in the experiment summary.
pub const THRESHOLDS: [f64; 3] = [1e-2, 1e-4, 1e-6];

/// Cost entries are drawn from `Stream::new(seed ^ COST_STREAM_SALT)`, block
/// by block, coordinate by coordinate; the graph uses `seed` itself.
pub const COST_STREAM_SALT: u64 = 0xA5A5_A5A5_A5A5_A5A5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostDistribution {
    #[default]
    StandardNormal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMatrixKind {
    Laplacian,
    Optimized,
}

impl PMatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            PMatrixKind::Laplacian => "laplacian",
            PMatrixKind::Optimized => "optimized",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

fn laplacian_only() -> Vec<PMatrixKind> {
    vec![PMatrixKind::Laplacian]
}

fn default_optimize_iters() -> usize {
    500
}

/// One experiment: a seeded random instance solved by every listed engine
/// under every listed averaging matrix. `t_max` replaces `solver.max_iters`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    #[serde(alias = "p_edge")]
    pub edge_prob: f64,
    pub seed: u64,
    #[serde(default)]
    pub cost_distribution: CostDistribution,
    #[serde(default)]
    pub solver: SolverConfig,
    pub variants: Vec<Variant>,
    #[serde(default = "laplacian_only", deserialize_with = "one_or_many")]
    pub p_matrix: Vec<PMatrixKind>,
    #[serde(alias = "T_max")]
    pub t_max: usize,
    #[serde(default = "default_optimize_iters")]
    pub optimize_iters: usize,
    #[serde(default)]
    pub parallel: bool,
    /// Used by the CLI when `--out-dir` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { max_iters: self.t_max, ..self.solver.clone() }
    }

    pub fn execution(&self) -> Execution {
        if self.parallel {
            Execution::Parallel
        } else {
            Execution::Serial
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::invalid("m and n must be positive"));
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return Err(Error::invalid(format!("edge_prob must lie in [0, 1], got {}", self.edge_prob)));
        }
        if self.variants.is_empty() {
            return Err(Error::invalid("variants must not be empty"));
        }
        if self.p_matrix.is_empty() {
            return Err(Error::invalid("p_matrix must not be empty"));
        }
        let cfg = self.solver_config();
        if self.variants.contains(&Variant::Bregman) {
            cfg.validate(self.m, self.n)?;
        } else {
            SolverConfig { strict: false, ..cfg }.validate(self.m, self.n)?;
        }
        Ok(())
    }
}

/// A generated instance: graph, its Laplacian averaging matrix, and linear
/// costs over the simplex.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: Graph,
    pub laplacian: AveragingMatrix,
    pub costs: StackedPoint,
    pub problem: ProblemInstance,
}

pub fn generate_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    let graph = gen_erdos_renyi(cfg.m, cfg.edge_prob, cfg.seed)?;
    let laplacian = build_laplacian_averaging(&graph)?;
    let mut rng = Stream::new(cfg.seed ^ COST_STREAM_SALT);
    let data = match cfg.cost_distribution {
        CostDistribution::StandardNormal => (0..cfg.m * cfg.n).map(|_| rng.standard_normal()).collect(),
    };
    let costs = StackedPoint::from_data(cfg.m, cfg.n, data)?;
    let problem = ProblemInstance::linear(&costs, FeasibleSet::ProbabilitySimplex)?;
    Ok(Instance { graph, laplacian, costs, problem })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCrossing {
    pub threshold: f64,
    /// First iteration `t ≥ 1` with consensus residual strictly below
    /// `threshold`.
    pub iteration: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub variant: Variant,
    pub p_matrix: PMatrixKind,
    pub trace: String,
    pub lambda2: f64,
    pub iterations: usize,
    pub thresholds: Vec<ThresholdCrossing>,
    pub final_objective_gap: Option<f64>,
    pub final_consensus_residual: Option<f64>,
    pub error: Option<String>,
}

impl RunSummary {
    pub fn crossing(&self, threshold: f64) -> Option<usize> {
        self.thresholds.iter().find(|c| c.threshold == threshold).and_then(|c| c.iteration)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub runs: Vec<RunSummary>,
}

impl ExperimentSummary {
    pub fn run(&self, variant: Variant, p_matrix: PMatrixKind) -> Option<&RunSummary> {
        self.runs.iter().find(|r| r.variant == variant && r.p_matrix == p_matrix)
    }

    pub fn has_failures(&self) -> bool {
        self.runs.iter().any(|r| r.error.is_some())
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Runs every (averaging matrix, engine) pair on one instance and writes into
/// `out_dir`: `graph.json`, `p_<kind>.json`, one `<variant>_<kind>.csv` per
/// run, and `summary.json`. A failing run is recorded in the summary and does
/// not stop the others.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentSummary> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let inst = generate_instance(cfg)?;
    write_json(&inst.graph, &out_dir.join("graph.json"))?;
    let solver = cfg.solver_config();
    let opts = RunOptions { execution: cfg.execution(), certify: true };

    let mut runs = Vec::new();
    for &kind in &cfg.p_matrix {
        let p = match kind {
            PMatrixKind::Laplacian => inst.laplacian.clone(),
            PMatrixKind::Optimized => optimize_averaging_matrix(&inst.graph, cfg.optimize_iters)?,
        };
        write_json(&p, &out_dir.join(format!("p_{}.json", kind.name())))?;
        let lambda2 = p.lambda2_abs()?;
        for &variant in &cfg.variants {
            let name = format!("{}_{}.csv", variant.name(), kind.name());
            let summary = match run_with(&inst.problem, &p, &solver, variant, &opts) {
                Ok(trace) => {
                    write_csv(&trace.records, &out_dir.join(&name))?;
                    summarize(&trace, variant, kind, name, lambda2)
                }
                Err(e) => RunSummary {
                    variant,
                    p_matrix: kind,
                    trace: name,
                    lambda2,
                    iterations: 0,
                    thresholds: vec![],
                    final_objective_gap: None,
                    final_consensus_residual: None,
                    error: Some(e.to_string()),
                },
            };
            runs.push(summary);
        }
    }
    let summary = ExperimentSummary { m: cfg.m, n: cfg.n, seed: cfg.seed, runs };
    write_json(&summary, &out_dir.join("summary.json"))?;
    Ok(summary)
}

fn summarize(trace: &RunTrace, variant: Variant, kind: PMatrixKind, name: String, lambda2: f64) -> RunSummary {
    let last = trace.records.last();
    RunSummary {
        variant,
        p_matrix: kind,
        trace: name,
        lambda2,
        iterations: trace.final_state.t,
        thresholds: THRESHOLDS
            .iter()
            .map(|&threshold| ThresholdCrossing { threshold, iteration: trace.first_below(threshold) })
            .collect(),
        final_objective_gap: last.and_then(|r| r.objective_gap),
        final_consensus_residual: last.map(|r| r.consensus_residual),
        error: trace.failure.as_ref().map(|e| e.to_string()),
    }
}
