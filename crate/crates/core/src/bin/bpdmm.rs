//! Command-line front end: instance generation, experiment runs, averaging
//! matrix design, and reports.
//!
//! Exit status is 0 on success, 1 for invalid input or I/O problems, and 2
//! when a solver step fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bregman_pdmm::graph::{optimize_averaging_matrix, Graph};
use bregman_pdmm::harness::{generate_instance, report, run_experiment, ExperimentConfig, PMatrixKind};
use bregman_pdmm::solver::{SolverConfig, Variant};
use bregman_pdmm::{Error, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bpdmm", version, about = "Euclidean and Bregman PDMM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance: graph.json, averaging.json, costs.json.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "edge-prob")]
        edge_prob: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
    },
    /// Design an averaging matrix with small second eigenvalue for a graph.
    OptimizeP {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot CSV traces as SVG and print threshold crossings.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        svg: PathBuf,
    },
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::Io { path: path.to_owned(), source: e })
}

fn gen(m: usize, n: usize, edge_prob: f64, seed: u64, out: &Path) -> Result<()> {
    let cfg = ExperimentConfig {
        m,
        n,
        edge_prob,
        seed,
        cost_distribution: Default::default(),
        solver: SolverConfig::default(),
        variants: vec![Variant::Bregman],
        p_matrix: vec![PMatrixKind::Laplacian],
        t_max: 0,
        optimize_iters: 0,
        parallel: false,
        out_dir: None,
    };
    let inst = generate_instance(&cfg)?;
    fs::create_dir_all(out).map_err(|e| Error::Io { path: out.to_owned(), source: e })?;
    write_json(&inst.graph, &out.join("graph.json"))?;
    write_json(&inst.laplacian, &out.join("averaging.json"))?;
    write_json(&inst.costs, &out.join("costs.json"))?;
    println!("wrote {} (m = {m}, {} edges)", out.display(), inst.graph.edge_count());
    Ok(())
}

/// Returns whether every run finished without a solver failure.
fn run(config: &Path, out_dir: Option<PathBuf>) -> Result<bool> {
    let cfg = ExperimentConfig::from_path(config)?;
    let out = out_dir
        .or_else(|| cfg.out_dir.clone())
        .ok_or_else(|| Error::InvalidArgument("no output directory: pass --out-dir".into()))?;
    let summary = run_experiment(&cfg, &out)?;
    for r in &summary.runs {
        let cross: Vec<String> = r
            .thresholds
            .iter()
            .map(|c| match c.iteration {
                Some(t) => format!("{:e}@{t}", c.threshold),
                None => format!("{:e}@-", c.threshold),
            })
            .collect();
        print!("{} {}: {} iterations, lambda2 {:.6}, {}", r.variant.name(), r.p_matrix.name(), r.iterations, r.lambda2, cross.join(" "));
        match &r.error {
            Some(e) => println!(", failed: {e}"),
            None => println!(),
        }
    }
    Ok(!summary.has_failures())
}

fn optimize(graph: &Path, iters: usize, out: &Path) -> Result<()> {
    let text = fs::read_to_string(graph).map_err(|e| Error::Io { path: graph.to_owned(), source: e })?;
    let g: Graph = serde_json::from_str(&text)?;
    let p = optimize_averaging_matrix(&g, iters)?;
    write_json(&p, out)?;
    println!("lambda2 {:.12}", p.lambda2_abs()?);
    Ok(())
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_solver_failure() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen { m, n, edge_prob, seed, out } => gen(m, n, edge_prob, seed, &out).map(|_| true),
        Command::Run { config, out_dir } => run(&config, out_dir),
        Command::OptimizeP { graph, iters, out } => optimize(&graph, iters, &out).map(|_| true),
        Command::Report { traces, svg } => report(&traces, &svg).map(|text| {
            print!("{text}");
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => exit_for(&e),
    }
}
