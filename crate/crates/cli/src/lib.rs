//! Experiment driver for sparse Bayesian coresets: data generation, coreset
//! construction, sparsity sweeps, evaluation and small-instance theory checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod stats;
pub mod sweep;
pub mod theory;

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use coreset_iht::models::write_csv_dataset;
use coreset_iht::{SolverTrace, Weights};
use ndarray::Array1;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, ExperimentKind, ModelParams, Overrides, SolverChoice, SolverParams, Weighting};
pub use experiment::{build_model, construct, derive_seed, trial_seed, Instance, Stream};
pub use stats::{median, quantile};
pub use sweep::{aggregate, render_aggregate, run_sweep, AggregateRow, RunRecord, SweepReport, AGGREGATE_COLUMNS};
pub use theory::{planted_instance, run_theory_check, TheoryConfig, TheoryInstance, TheoryReport};

/// Writes the dataset of trial `trial` as CSV, preceded by `#` provenance lines.
pub fn gen_data<W: Write>(cfg: &ExperimentConfig, trial: usize, mut out: W) -> anyhow::Result<()> {
    let seed = trial_seed(cfg, trial);
    let model = build_model(cfg, seed)?;
    writeln!(out, "# config: {}", serde_json::to_string(cfg)?)?;
    writeln!(out, "# trial: {trial}, seed: {seed}")?;
    write_csv_dataset(out, model.dataset(), model.kind())?;
    Ok(())
}

/// A constructed coreset with everything needed to rebuild its model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildOutput {
    pub config: ExperimentConfig,
    pub trial: usize,
    pub trial_seed: u64,
    pub solver: SolverChoice,
    pub k: usize,
    /// Dense weight vector over all data points.
    pub weights: Vec<f64>,
    pub time_ns: Option<u64>,
    pub trace: Option<SolverTrace>,
}

/// Builds one coreset for trial `trial` of the configured experiment.
pub fn build(cfg: &ExperimentConfig, solver: SolverChoice, k: usize, trial: usize) -> anyhow::Result<BuildOutput> {
    let seed = trial_seed(cfg, trial);
    let inst = Instance::new(build_model(cfg, seed)?, cfg.weighting)?;
    anyhow::ensure!(k >= 1 && k <= inst.model.n(), "k = {k} must satisfy 1 <= k <= n = {}", inst.model.n());
    let problem = inst.problem(cfg.samples, seed)?;
    let c = construct(cfg, solver, &problem, k, seed)?;
    Ok(BuildOutput {
        config: cfg.clone(),
        trial,
        trial_seed: seed,
        solver,
        k,
        weights: c.weights.values().to_vec(),
        time_ns: c.time_ns,
        trace: c.trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub config: ExperimentConfig,
    pub trial: usize,
    pub trial_seed: u64,
    pub solver: SolverChoice,
    pub k: usize,
    pub forward_kl: f64,
    pub reverse_kl: f64,
    pub symmetrized_kl: f64,
    pub map_l2: f64,
}

/// Compares the coreset posterior of `built` with the full-data posterior.
pub fn evaluate(built: &BuildOutput) -> anyhow::Result<Evaluation> {
    let cfg = &built.config;
    let inst = Instance::new(build_model(cfg, built.trial_seed)?, cfg.weighting)?;
    let w = Weights::new(Array1::from(built.weights.clone())).context("weights in build output")?;
    anyhow::ensure!(w.len() == inst.model.n(), "weights have length {}, model has {} points", w.len(), inst.model.n());
    let (kl, map_l2) = inst.evaluate(&w)?;
    Ok(Evaluation {
        config: cfg.clone(),
        trial: built.trial,
        trial_seed: built.trial_seed,
        solver: built.solver,
        k: built.k,
        forward_kl: kl.forward,
        reverse_kl: kl.reverse,
        symmetrized_kl: kl.symmetrized,
        map_l2,
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Pretty JSON to `path`, or to stdout when `path` is `None`.
pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> anyhow::Result<()> {
    let body = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(body.as_bytes())?),
    }
}
