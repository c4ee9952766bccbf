//! Model construction and coreset building shared by the subcommands.

use std::time::Instant;

use anyhow::{bail, Context};
use coreset_iht::models::{
    build_projection, conjugate_posterior, laplace_approximation, load_csv_dataset, posterior, synth_gaussian_dataset,
    synth_glm_dataset, synth_radial_basis_model, LaplaceOptions,
};
use coreset_iht::{
    kl_values, uniform_coreset, Gaussian, KlValues, Model, ModelKind, Problem, SolverConfig,
    SolverKind, SolverTrace, Weights,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, ExperimentKind, SolverChoice, Weighting};

/// Independent random streams derived from one trial seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Data,
    Projection,
    Solver,
    Uniform,
}

/// A seed for `stream`, drawn from the ChaCha stream of the same index keyed by `base`.
pub fn derive_seed(base: u64, stream: Stream) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream as u64);
    rng.next_u64()
}

/// Seed of trial `t`.
pub fn trial_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    cfg.seed.wrapping_add(trial as u64)
}

/// The model of one trial. Synthetic data is regenerated from the trial seed; CSV data
/// is the same in every trial.
pub fn build_model(cfg: &ExperimentConfig, trial_seed: u64) -> anyhow::Result<Model> {
    let seed = derive_seed(trial_seed, Stream::Data);
    let n = cfg.model.n;
    let model = match cfg.experiment {
        ExperimentKind::Gaussian => synth_gaussian_dataset::<f64>(cfg.dim(), n, seed)?.0,
        ExperimentKind::RadialBasis => {
            synth_radial_basis_model(n, &cfg.model.basis_scales, cfg.model.per_scale_count, seed)?
        }
        ExperimentKind::Logistic => synth_glm_dataset(ModelKind::Logistic, n, cfg.dim(), cfg.model.theta.as_deref(), seed)?,
        ExperimentKind::Poisson => synth_glm_dataset(ModelKind::Poisson, n, cfg.dim(), cfg.model.theta.as_deref(), seed)?,
        ExperimentKind::Csv => {
            let (Some(path), Some(kind)) = (&cfg.model.csv_path, cfg.model.csv_kind) else {
                bail!("the csv experiment needs model.csv_path and model.csv_kind");
            };
            let ds = load_csv_dataset(path, kind).with_context(|| format!("loading {}", path.display()))?;
            Model::from_dataset(kind, ds)?
        }
    };
    Ok(model)
}

/// A model together with its full-data posterior and the weighting distribution.
pub struct Instance {
    pub model: Model,
    pub full: Gaussian,
    pub pi_hat: Gaussian,
}

impl Instance {
    pub fn new(model: Model, weighting: Weighting) -> anyhow::Result<Self> {
        let ones = Weights::ones(model.n());
        let full = posterior(&model, &ones).context("full-data posterior")?;
        let pi_hat = match weighting {
            Weighting::Exact => conjugate_posterior(&model, &ones).context("exact weighting distribution")?,
            Weighting::Laplace => laplace_approximation(&model, &ones, LaplaceOptions::default().tol)
                .context("Laplace weighting distribution")?,
        };
        Ok(Self { model, full, pi_hat })
    }

    pub fn problem(&self, samples: usize, trial_seed: u64) -> anyhow::Result<Problem> {
        let proj = build_projection(&self.model, &self.pi_hat, samples, derive_seed(trial_seed, Stream::Projection))?;
        Ok(proj.to_problem()?)
    }

    /// KL values between the full-data and coreset posteriors, and the distance of
    /// their modes.
    pub fn evaluate(&self, w: &Weights) -> anyhow::Result<(KlValues, f64)> {
        let coreset = posterior(&self.model, w).context("coreset posterior")?;
        let kl = kl_values(&self.full, &coreset)?;
        let d = self.full.mean() - coreset.mean();
        Ok((kl, d.dot(&d).sqrt()))
    }
}

/// Solver settings for sparsity `k`.
pub fn solver_config(cfg: &ExperimentConfig, choice: SolverChoice, k: usize, trial_seed: u64) -> SolverConfig {
    let base = match choice {
        SolverChoice::AihtBatched => SolverConfig::batched(k, cfg.solver.batch_fraction),
        _ => SolverConfig::new(k),
    };
    let base = match cfg.solver.max_iters {
        Some(m) => base.with_max_iters(m),
        None => base,
    };
    base.with_rel_tol(cfg.solver.rel_tol)
        .with_momentum(cfg.solver.momentum)
        .with_seed(derive_seed(trial_seed, Stream::Solver))
        .with_timing(cfg.timing)
}

/// Output of one coreset construction.
pub struct Construction {
    pub weights: Weights,
    pub trace: Option<SolverTrace>,
    /// Wall time of the construction, when timing is enabled.
    pub time_ns: Option<u64>,
}

/// Builds a size-`k` coreset on `problem`.
pub fn construct(
    cfg: &ExperimentConfig,
    choice: SolverChoice,
    problem: &Problem,
    k: usize,
    trial_seed: u64,
) -> anyhow::Result<Construction> {
    let start = cfg.timing.then(Instant::now);
    let (weights, trace) = match choice {
        SolverChoice::Uniform => (uniform_coreset(problem.n(), k, derive_seed(trial_seed, Stream::Uniform))?, None),
        other => {
            let kind = match other {
                SolverChoice::Vanilla => SolverKind::Vanilla,
                SolverChoice::Aiht => SolverKind::Aiht,
                SolverChoice::Aiht2 => SolverKind::Aiht2,
                _ => SolverKind::AihtBatched,
            };
            let (w, trace) = kind.solve(problem, &solver_config(cfg, choice, k, trial_seed))?;
            (w, Some(trace))
        }
    };
    let time_ns = start.map(|s| s.elapsed().as_nanos() as u64);
    Ok(Construction { weights, trace, time_ns })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_stable() {
        let a = derive_seed(5, Stream::Data);
        assert_eq!(a, derive_seed(5, Stream::Data));
        assert_ne!(a, derive_seed(5, Stream::Projection));
        assert_ne!(a, derive_seed(6, Stream::Data));
    }

    #[test]
    fn gaussian_instance_builds() {
        let cfg = ExperimentConfig {
            model: crate::config::ModelParams { n: 12, dim: Some(3), ..Default::default() },
            ..Default::default()
        };
        let inst = Instance::new(build_model(&cfg, 1).unwrap(), Weighting::Exact).unwrap();
        let p = inst.problem(50, 1).unwrap();
        assert_eq!((p.s_dim(), p.n()), (50, 12));
        let c = construct(&cfg, SolverChoice::Aiht2, &p, 4, 1).unwrap();
        assert!(c.weights.nnz() <= 4);
        let (kl, _) = inst.evaluate(&Weights::ones(12)).unwrap();
        assert!(kl.symmetrized.abs() < 1e-12);
    }
}
