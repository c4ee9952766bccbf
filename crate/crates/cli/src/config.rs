//! Experiment configuration: a TOML file whose fields can be overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use coreset_iht::models::DEFAULT_BASIS_SCALES;
use coreset_iht::{MomentumRule, ModelKind};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Gaussian,
    RadialBasis,
    Logistic,
    Poisson,
    Csv,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Gaussian => "gaussian",
            ExperimentKind::RadialBasis => "radial_basis",
            ExperimentKind::Logistic => "logistic",
            ExperimentKind::Poisson => "poisson",
            ExperimentKind::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Vanilla,
    Aiht,
    Aiht2,
    AihtBatched,
    Uniform,
}

impl SolverChoice {
    pub fn name(self) -> &'static str {
        match self {
            SolverChoice::Vanilla => "vanilla",
            SolverChoice::Aiht => "aiht",
            SolverChoice::Aiht2 => "aiht2",
            SolverChoice::AihtBatched => "aiht_batched",
            SolverChoice::Uniform => "uniform",
        }
    }
}

/// Distribution the log-likelihoods are projected under.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Laplace approximation at the full-data MAP.
    #[default]
    Laplace,
    /// Closed-form full-data posterior (conjugate models only).
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Number of data points for synthetic experiments.
    pub n: usize,
    /// Feature dimension; defaults to 20 (gaussian), 2 (logistic) or 1 (poisson).
    pub dim: Option<usize>,
    /// True coefficients for synthetic GLM data (length `dim + 1`).
    pub theta: Option<Vec<f64>>,
    pub basis_scales: Vec<f64>,
    pub per_scale_count: usize,
    /// Dataset for the `csv` experiment.
    pub csv_path: Option<PathBuf>,
    /// Model used for the `csv` experiment.
    pub csv_kind: Option<ModelKind>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n: 100,
            dim: None,
            theta: None,
            basis_scales: DEFAULT_BASIS_SCALES.to_vec(),
            per_scale_count: 50,
            csv_path: None,
            csv_kind: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    /// Iteration cap; 300 by default, 500 for the batched solver.
    pub max_iters: Option<usize>,
    pub rel_tol: f64,
    pub momentum: MomentumRule,
    pub batch_fraction: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { max_iters: None, rel_tol: 1e-5, momentum: MomentumRule::ExactArgmin, batch_fraction: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub solvers: Vec<SolverChoice>,
    pub ks: Vec<usize>,
    pub trials: usize,
    /// Monte Carlo sample count `S` of the log-likelihood projection.
    pub samples: usize,
    /// Trial `t` uses seed `seed + t`.
    pub seed: u64,
    pub weighting: Weighting,
    /// Also report the distance between full-data and coreset MAP estimates.
    pub map_l2: bool,
    /// Record construction wall time; off makes every output byte-reproducible.
    pub timing: bool,
    pub output_dir: PathBuf,
    pub model: ModelParams,
    pub solver: SolverParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Gaussian,
            solvers: vec![SolverChoice::Aiht, SolverChoice::Aiht2, SolverChoice::Uniform],
            ks: vec![10],
            trials: 10,
            samples: 500,
            seed: 0,
            weighting: Weighting::Laplace,
            map_l2: false,
            timing: true,
            output_dir: PathBuf::from("out"),
            model: ModelParams::default(),
            solver: SolverParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing experiment config")?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    /// Feature dimension after applying the per-experiment default.
    pub fn dim(&self) -> usize {
        self.model.dim.unwrap_or(match self.experiment {
            ExperimentKind::Gaussian => 20,
            ExperimentKind::Poisson => 1,
            _ => 2,
        })
    }

    /// Checks everything that can be checked before data exists.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trials < 1 {
            bail!("trials must be at least 1");
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            bail!("ks must be a non-empty list of positive sparsities");
        }
        if self.solvers.is_empty() {
            bail!("at least one solver is required");
        }
        if self.samples < 2 {
            bail!("samples must be at least 2");
        }
        if self.experiment != ExperimentKind::Csv {
            let n = self.model.n;
            if let Some(k) = self.ks.iter().find(|&&k| k > n) {
                bail!("k = {k} exceeds the number of data points n = {n}");
            }
        } else if self.model.csv_path.is_none() || self.model.csv_kind.is_none() {
            bail!("the csv experiment needs model.csv_path and model.csv_kind");
        }
        if !(self.solver.rel_tol > 0.0) {
            bail!("solver.rel_tol must be positive");
        }
        if !(self.solver.batch_fraction > 0.0 && self.solver.batch_fraction <= 1.0) {
            bail!("solver.batch_fraction must lie in (0, 1]");
        }
        Ok(())
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub solvers: Option<Vec<SolverChoice>>,
    pub ks: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub dim: Option<usize>,
    pub weighting: Option<Weighting>,
    pub map_l2: Option<bool>,
    pub timing: Option<bool>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($src:expr, $dst:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(self.experiment, cfg.experiment);
        set!(self.solvers, cfg.solvers);
        set!(self.ks, cfg.ks);
        set!(self.trials, cfg.trials);
        set!(self.samples, cfg.samples);
        set!(self.seed, cfg.seed);
        set!(self.n, cfg.model.n);
        set!(self.weighting, cfg.weighting);
        set!(self.map_l2, cfg.map_l2);
        set!(self.timing, cfg.timing);
        set!(self.output_dir, cfg.output_dir);
        if self.dim.is_some() {
            cfg.model.dim = self.dim;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = ExperimentConfig::from_toml("experiment = \"logistic\"\nks = [3, 5]\n[model]\nn = 40\n").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Logistic);
        assert_eq!(cfg.ks, vec![3, 5]);
        assert_eq!(cfg.model.n, 40);
        assert_eq!(cfg.samples, 500);
        assert_eq!(cfg.dim(), 2);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_toml("trails = 3\n").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let mut cfg = ExperimentConfig::from_toml("trials = 4\nseed = 9\n").unwrap();
        Overrides { trials: Some(2), ..Overrides::default() }.apply(&mut cfg);
        assert_eq!((cfg.trials, cfg.seed), (2, 9));
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig { ks: vec![500], ..ExperimentConfig::default() };
        assert!(cfg.validate().is_err());
        cfg.ks = vec![5];
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
    }
}
