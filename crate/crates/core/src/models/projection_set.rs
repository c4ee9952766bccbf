use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::gaussian::GaussianDist;
use crate::models::likelihood::{BayesianModel, LogLikelihood};
use crate::problem::SparseRegressionProblem;
use crate::scalar::Scalar;

/// Monte Carlo projection of the centered log-likelihoods: column `i` of `phi` is
/// `(1/sqrt(S)) [L_i(theta_1) - mean_i, ..., L_i(theta_S) - mean_i]`.
#[derive(Clone, Debug)]
pub struct ProjectionSet<T: Scalar> {
    pub phi: Array2<T>,
    pub weighting_dist: GaussianDist<T>,
    pub rng_seed: u64,
}

impl<T: Scalar> ProjectionSet<T> {
    pub fn sample_count(&self) -> usize {
        self.phi.nrows()
    }

    pub fn n(&self) -> usize {
        self.phi.ncols()
    }

    /// Sparse regression problem with `y` the sum of all columns.
    pub fn to_problem(&self) -> Result<SparseRegressionProblem<T>> {
        SparseRegressionProblem::from_columns(self.phi.clone())
    }
}

pub fn build_projection<T: Scalar>(
    m: &BayesianModel<T>,
    pi_hat: &GaussianDist<T>,
    s_count: usize,
    seed: u64,
) -> Result<ProjectionSet<T>> {
    build_projection_from(m, pi_hat, s_count, seed)
}

/// [`build_projection`] for any log-likelihood source.
pub fn build_projection_from<T: Scalar, L: LogLikelihood<T> + ?Sized>(
    m: &L,
    pi_hat: &GaussianDist<T>,
    s_count: usize,
    seed: u64,
) -> Result<ProjectionSet<T>> {
    if s_count < 2 {
        return Err(Error::InvalidArgument(format!("sample count {s_count} must be at least 2")));
    }
    if pi_hat.dim() != m.param_dim() {
        return Err(Error::DimensionMismatch { expected: m.param_dim(), found: pi_hat.dim() });
    }
    let n = m.num_points();
    if n == 0 {
        return Err(Error::InvalidArgument("model has no data points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thetas: Vec<Array1<T>> = (0..s_count).map(|_| pi_hat.sample(&mut rng)).collect();

    let s = T::from_usize(s_count).unwrap();
    let scale = T::one() / s.sqrt();
    let mut phi = Array2::<T>::zeros((s_count, n));
    for i in 0..n {
        let mut col = phi.column_mut(i);
        for (j, theta) in thetas.iter().enumerate() {
            col[j] = m.log_likelihood(i, theta.view())?;
        }
        // shift by the first value so constant columns come out exactly zero
        let pivot = col[0];
        col.mapv_inplace(|v| v - pivot);
        let mean = col.sum() / s;
        col.mapv_inplace(|v| (v - mean) * scale);
    }
    Ok(ProjectionSet { phi, weighting_dist: pi_hat.clone(), rng_seed: seed })
}
