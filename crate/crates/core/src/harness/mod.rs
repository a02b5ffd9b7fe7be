//! Seeded experiment orchestration: instance generation, runs over several
//! engines and averaging matrices, CSV traces, and SVG reports.

mod experiment;
mod report;

pub use experiment::{
    generate_instance, run_experiment, CostDistribution, ExperimentConfig, ExperimentSummary, Instance,
    PMatrixKind, RunSummary, ThresholdCrossing, COST_STREAM_SALT, THRESHOLDS,
};
pub use report::{render_svg, report, TraceSeries};
