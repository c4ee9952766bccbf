//! Bayesian models, their posteriors and the log-likelihood projection that turns a
//! model into a sparse regression problem.

mod dataset;
mod gaussian;
mod likelihood;
mod posterior;
mod projection_set;
mod synth;

pub use dataset::{load_csv_dataset, read_csv_dataset, save_csv_dataset, write_csv_dataset, Dataset};
pub use gaussian::GaussianDist;
pub use likelihood::{log_likelihood, BayesianModel, Likelihood, LogLikelihood, ModelKind, RadialBasis};
pub use posterior::{
    conjugate_posterior, laplace_approximation, laplace_with, map_estimate, posterior, LaplaceOptions,
};
pub use projection_set::{build_projection, build_projection_from, ProjectionSet};
pub use synth::{synth_gaussian_dataset, synth_glm_dataset, synth_radial_basis_model, DEFAULT_BASIS_SCALES};
