//! Sparsity sweeps: every trial, every `k`, every solver, aggregated into one CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use coreset_iht::{Problem, Termination};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SolverChoice};
use crate::experiment::{build_model, construct, trial_seed, Instance};
use crate::stats::{median, quantile};

/// Columns of the aggregate CSV.
pub const AGGREGATE_COLUMNS: [&str; 13] = [
    "experiment",
    "solver",
    "k",
    "trial_count",
    "fkl_med",
    "fkl_q25",
    "fkl_q75",
    "rkl_med",
    "rkl_q25",
    "rkl_q75",
    "skl_med",
    "map_l2_med",
    "time_ns_med",
];

/// Outcome of one (trial, k, solver) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub solver: SolverChoice,
    pub k: usize,
    pub trial: usize,
    pub trial_seed: u64,
    /// Failure message; `None` on success.
    pub error: Option<String>,
    pub forward_kl: Option<f64>,
    pub reverse_kl: Option<f64>,
    pub symmetrized_kl: Option<f64>,
    pub map_l2: Option<f64>,
    pub time_ns: Option<u64>,
    pub iterations: Option<usize>,
    pub termination: Option<Termination>,
    pub final_objective: Option<f64>,
    /// Selected points and their weights.
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
}

impl RunRecord {
    fn empty(cfg: &ExperimentConfig, solver: SolverChoice, k: usize, trial: usize) -> Self {
        Self {
            experiment: cfg.experiment.name().to_string(),
            solver,
            k,
            trial,
            trial_seed: trial_seed(cfg, trial),
            error: None,
            forward_kl: None,
            reverse_kl: None,
            symmetrized_kl: None,
            map_l2: None,
            time_ns: None,
            iterations: None,
            termination: None,
            final_objective: None,
            support: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

/// One aggregate row: order statistics over the successful trials of a (solver, k).
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub experiment: String,
    pub solver: SolverChoice,
    pub k: usize,
    pub trial_count: usize,
    pub fkl: [Option<f64>; 3],
    pub rkl: [Option<f64>; 3],
    pub skl_med: Option<f64>,
    pub map_l2_med: Option<f64>,
    pub time_ns_med: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub records: Vec<RunRecord>,
    pub rows: Vec<AggregateRow>,
    pub aggregate_path: PathBuf,
    pub run_paths: Vec<PathBuf>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.succeeded()).count()
    }

    pub fn row(&self, solver: SolverChoice, k: usize) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.solver == solver && r.k == k)
    }
}

#[derive(Serialize)]
struct RunFile<'a> {
    config: &'a ExperimentConfig,
    run: &'a RunRecord,
}

fn run_one(cfg: &ExperimentConfig, inst: &Instance, problem: &Problem, solver: SolverChoice, k: usize, trial: usize) -> RunRecord {
    let mut rec = RunRecord::empty(cfg, solver, k, trial);
    let result = (|| -> anyhow::Result<()> {
        let c = construct(cfg, solver, problem, k, rec.trial_seed)?;
        rec.time_ns = c.time_ns;
        if let Some(trace) = &c.trace {
            rec.iterations = Some(trace.iterations());
            rec.termination = Some(trace.termination);
            rec.final_objective = trace.final_objective();
        }
        rec.support = c.weights.support().to_vec();
        rec.weights = rec.support.iter().map(|&i| c.weights.get(i)).collect();
        let (kl, map_l2) = inst.evaluate(&c.weights)?;
        rec.forward_kl = Some(kl.forward);
        rec.reverse_kl = Some(kl.reverse);
        rec.symmetrized_kl = Some(kl.symmetrized);
        rec.map_l2 = cfg.map_l2.then_some(map_l2);
        Ok(())
    })();
    if let Err(e) = result {
        rec.error = Some(format!("{e:#}"));
    }
    rec
}

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Vec<RunRecord> {
    let seed = trial_seed(cfg, trial);
    let setup = (|| -> anyhow::Result<(Instance, Problem)> {
        let inst = Instance::new(build_model(cfg, seed)?, cfg.weighting)?;
        let problem = inst.problem(cfg.samples, seed)?;
        Ok((inst, problem))
    })();
    let mut out = Vec::with_capacity(cfg.ks.len() * cfg.solvers.len());
    for &solver in &cfg.solvers {
        for &k in &cfg.ks {
            out.push(match &setup {
                Ok((inst, problem)) => run_one(cfg, inst, problem, solver, k, trial),
                Err(e) => {
                    let mut rec = RunRecord::empty(cfg, solver, k, trial);
                    rec.error = Some(format!("{e:#}"));
                    rec
                }
            });
        }
    }
    out
}

/// Aggregates successful runs per (solver, k), in configuration order.
pub fn aggregate(cfg: &ExperimentConfig, records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for &solver in &cfg.solvers {
        for &k in &cfg.ks {
            let ok: Vec<&RunRecord> =
                records.iter().filter(|r| r.solver == solver && r.k == k && r.succeeded()).collect();
            let col = |f: &dyn Fn(&RunRecord) -> Option<f64>| -> Vec<f64> { ok.iter().filter_map(|r| f(r)).collect() };
            let fkl = col(&|r| r.forward_kl);
            let rkl = col(&|r| r.reverse_kl);
            let quartiles = |v: &[f64]| [median(v), quantile(v, 0.25), quantile(v, 0.75)];
            rows.push(AggregateRow {
                experiment: cfg.experiment.name().to_string(),
                solver,
                k,
                trial_count: ok.len(),
                fkl: quartiles(&fkl),
                rkl: quartiles(&rkl),
                skl_med: median(&col(&|r| r.symmetrized_kl)),
                map_l2_med: median(&col(&|r| r.map_l2)),
                time_ns_med: median(&col(&|r| r.time_ns.map(|t| t as f64))),
            });
        }
    }
    rows
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// The aggregate CSV: `#` comment lines carrying the configuration, a header row and
/// one row per (solver, k).
pub fn render_aggregate(cfg: &ExperimentConfig, rows: &[AggregateRow]) -> anyhow::Result<String> {
    let mut out = String::new();
    writeln!(out, "# config: {}", serde_json::to_string(cfg)?)?;
    writeln!(out, "# seed: {}", cfg.seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(AGGREGATE_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.solver.name().to_string(),
            r.k.to_string(),
            r.trial_count.to_string(),
            cell(r.fkl[0]),
            cell(r.fkl[1]),
            cell(r.fkl[2]),
            cell(r.rkl[0]),
            cell(r.rkl[1]),
            cell(r.rkl[2]),
            cell(r.skl_med),
            cell(r.map_l2_med),
            cell(r.time_ns_med),
        ])?;
    }
    out.push_str(std::str::from_utf8(&w.into_inner()?)?);
    Ok(out)
}

/// Path of the per-run JSON file.
pub fn run_path(dir: &Path, rec: &RunRecord) -> PathBuf {
    dir.join("runs").join(format!("{}_{}_k{}_t{}.json", rec.experiment, rec.solver.name(), rec.k, rec.trial))
}

/// Runs every trial in parallel, then writes per-run JSON files and
/// `aggregate.csv` under the output directory. Individual run failures are recorded,
/// not raised; see [`SweepReport::failures`].
pub fn run_sweep(cfg: &ExperimentConfig) -> anyhow::Result<SweepReport> {
    cfg.validate()?;
    let records: Vec<RunRecord> =
        (0..cfg.trials).into_par_iter().flat_map_iter(|t| run_trial(cfg, t)).collect();
    let rows = aggregate(cfg, &records);

    let dir = &cfg.output_dir;
    fs::create_dir_all(dir.join("runs")).with_context(|| format!("creating {}", dir.display()))?;
    let mut run_paths = Vec::with_capacity(records.len());
    for rec in &records {
        let path = run_path(dir, rec);
        let body = serde_json::to_string_pretty(&RunFile { config: cfg, run: rec })?;
        fs::write(&path, body + "\n").with_context(|| format!("writing {}", path.display()))?;
        run_paths.push(path);
    }
    let aggregate_path = dir.join("aggregate.csv");
    fs::write(&aggregate_path, render_aggregate(cfg, &rows)?)
        .with_context(|| format!("writing {}", aggregate_path.display()))?;
    Ok(SweepReport { records, rows, aggregate_path, run_paths })
}
