//! Small certified instances: exhaustive RIP constants, brute-force optimum and the
//! per-iteration distance bound of A-IHT.

use std::path::PathBuf;

use anyhow::Context;
use coreset_iht::evaluation::DEFAULT_ENUMERATION_BUDGET;
use coreset_iht::{brute_force_optimum, estimate_rip_with_budget, theorem1_check, Error, InvariantReport, Problem, SolverConfig, Weights};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryConfig {
    /// Number of candidate points (columns of `Phi`).
    pub n: usize,
    /// Number of rows of `Phi`.
    pub samples: usize,
    pub k: usize,
    pub instances: usize,
    /// Instance `i` uses seed `seed + i`.
    pub seed: u64,
    /// Largest number of supports enumerated per level.
    pub budget: u64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub output: PathBuf,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            n: 8,
            samples: 30,
            k: 2,
            instances: 1,
            seed: 0,
            budget: DEFAULT_ENUMERATION_BUDGET as u64,
            max_iters: SolverConfig::DEFAULT_MAX_ITERS,
            rel_tol: SolverConfig::DEFAULT_REL_TOL,
            output: PathBuf::from("theory.json"),
        }
    }
}

/// Noise-free instance: `Phi` has i.i.d. `N(0, 1/S)` entries, the planted `w` has `k`
/// entries uniform on `[1, 5]` and `y = Phi w`.
pub fn planted_instance(n: usize, samples: usize, k: usize, seed: u64) -> anyhow::Result<(Problem, Weights)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (samples as f64).sqrt();
    let phi = Array2::from_shape_simple_fn((samples, n), || scale * rng.sample::<f64, _>(StandardNormal));
    let mut w = Array1::<f64>::zeros(n);
    for i in sample(&mut rng, n, k.min(n)).into_iter() {
        w[i] = rng.random_range(1.0..=5.0);
    }
    let y = phi.dot(&w);
    Ok((Problem::new(phi, y)?, Weights::new(w)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryInstance {
    pub seed: u64,
    /// Objective of the certified optimum.
    pub optimum_objective: f64,
    pub optimum_support: Vec<usize>,
    pub report: InvariantReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub config: TheoryConfig,
    pub all_satisfied: bool,
    pub instances: Vec<TheoryInstance>,
}

/// Certifies every instance and writes the report as JSON to `cfg.output`.
pub fn run_theory_check(cfg: &TheoryConfig) -> anyhow::Result<TheoryReport> {
    anyhow::ensure!(cfg.instances >= 1, "instances must be at least 1");
    anyhow::ensure!(cfg.k >= 1 && cfg.k <= cfg.n, "k = {} must satisfy 1 <= k <= n = {}", cfg.k, cfg.n);
    let mut instances = Vec::with_capacity(cfg.instances);
    for i in 0..cfg.instances {
        let seed = cfg.seed.wrapping_add(i as u64);
        let (p, _) = planted_instance(cfg.n, cfg.samples, cfg.k, seed)?;
        let k = cfg.k;
        let rip = estimate_rip_with_budget(&p, &[k, 2 * k, 3 * k, 4 * k], cfg.budget as u128).map_err(refusal)?;
        let w_star = brute_force_optimum(&p, k, cfg.budget as u128).map_err(refusal)?;
        let solver = SolverConfig::new(k).with_max_iters(cfg.max_iters).with_rel_tol(cfg.rel_tol).with_timing(false);
        let (report, _) = theorem1_check(&p, &solver, &w_star, &rip)?;
        instances.push(TheoryInstance {
            seed,
            optimum_objective: p.objective_at(w_star.values()),
            optimum_support: w_star.support().to_vec(),
            report,
        });
    }
    let report = TheoryReport {
        config: cfg.clone(),
        all_satisfied: instances.iter().all(|i| i.report.all_satisfied),
        instances,
    };
    if let Some(parent) = cfg.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&cfg.output, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", cfg.output.display()))?;
    Ok(report)
}

fn refusal(e: Error) -> anyhow::Error {
    match e {
        Error::BudgetExceeded { required, budget } => anyhow::anyhow!(
            "refusing to run: exhaustive enumeration needs {required} supports but the budget is {budget}; \
             raise --budget or shrink n and k"
        ),
        other => other.into(),
    }
}
