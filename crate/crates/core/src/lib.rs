//! Bayesian coreset construction as non-negative sparse least squares, solved with
//! accelerated iterative hard thresholding.
//!
//! A model's per-datum log-likelihoods are projected onto a finite Monte Carlo
//! sample ([`models::build_projection`]), giving `min ||y - Phi w||^2` subject to
//! `||w||_0 <= k` and `w >= 0`. The [`solvers`] module solves it; [`evaluation`]
//! measures the resulting coreset posterior against the full one.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! `f64`.

// Negated comparisons are used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod models;
pub mod problem;
pub mod projection;
pub mod scalar;
pub mod solvers;

pub use baselines::uniform_coreset;
pub use error::{Error, Result};
pub use evaluation::{
    brute_force_optimum, coreset_kl, estimate_rip, estimate_rip_with_budget, gaussian_kl, kl_values,
    map_l2_distance, theorem1_check, InvariantReport, KlDirection, KlValues, RipConstants, Theorem1,
};
pub use models::{BayesianModel, Dataset, GaussianDist, ModelKind, ProjectionSet};
pub use problem::{gradient, objective, SparseRegressionProblem, WeightVector};
pub use projection::{project_nonneg, project_topk_excluding, project_topk_nonneg, restrict};
pub use scalar::Scalar;
pub use solvers::{
    line_search_step, momentum_coefficient, solve_aiht, solve_aiht2, solve_aiht_batched, solve_vanilla_iht,
    stochastic_gradient, MomentumRule, SolverConfig, SolverKind, SolverTrace, Termination,
};

pub type Problem = SparseRegressionProblem<f64>;
pub type Weights = WeightVector<f64>;
pub type Gaussian = GaussianDist<f64>;
pub type Model = BayesianModel<f64>;
pub type Data = Dataset<f64>;
pub type Projection = ProjectionSet<f64>;
