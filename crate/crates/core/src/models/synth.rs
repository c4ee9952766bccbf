//! Synthetic datasets and models.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Poisson, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::models::dataset::Dataset;
use crate::models::gaussian::GaussianDist;
use crate::models::likelihood::{sigmoid, softplus, variance, BayesianModel, Likelihood, ModelKind, RadialBasis};
use crate::models::posterior::conjugate_posterior;
use crate::problem::WeightVector;
use crate::scalar::Scalar;

fn normal_matrix<T: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<T> {
    Array2::from_shape_simple_fn((rows, cols), || T::lit(rng.sample::<f64, _>(StandardNormal)))
}

/// Gaussian mean inference: `theta ~ N(0, I)`, `x_n ~ N(theta, I)`. Returns the model
/// and its full-data posterior.
pub fn synth_gaussian_dataset<T: Scalar>(d: usize, n: usize, seed: u64) -> Result<(BayesianModel<T>, GaussianDist<T>)> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = GaussianDist::<T>::standard(d).sample(&mut rng);
    let mut x = normal_matrix::<T>(&mut rng, n, d);
    for mut row in x.rows_mut() {
        row += &theta;
    }
    let ds = Dataset::new(x, Array1::zeros(n), ModelKind::GaussianMean)?;
    let model = BayesianModel::from_dataset(ModelKind::GaussianMean, ds)?;
    let post = conjugate_posterior(&model, &WeightVector::ones(n))?;
    Ok((model, post))
}

/// Default basis scales of the radial-basis regression experiment.
pub const DEFAULT_BASIS_SCALES: [f64; 6] = [0.2, 0.4, 0.8, 1.2, 1.6, 2.0];

/// Bayesian radial-basis regression on synthetic 2-D coordinates.
///
/// Coordinates are uniform on `[-1.5, 1.5]^2` and responses are
/// `sin(2 x_0) + 0.5 cos(1.5 x_1) + 0.2 e`. For every scale, `per_scale_count` basis
/// centers are drawn uniformly from the data; one extra basis of scale 100 sits at the
/// coordinate mean. Noise variance is the empirical variance of the responses and the
/// prior is `N(m 1, s I)` with `m`, `s` their empirical mean and second moment.
pub fn synth_radial_basis_model<T: Scalar>(
    n: usize,
    basis_scales: &[f64],
    per_scale_count: usize,
    seed: u64,
) -> Result<BayesianModel<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("radial-basis model needs at least one data point".into()));
    }
    if basis_scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument("basis scales must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coord_dist = Uniform::new(-1.5f64, 1.5).expect("valid range");
    let coords: Array2<T> = Array2::from_shape_simple_fn((n, 2), || T::lit(coord_dist.sample(&mut rng)));
    let y: Array1<T> = coords
        .rows()
        .into_iter()
        .map(|c| {
            let (a, b) = (c[0].as_f64(), c[1].as_f64());
            let e: f64 = rng.sample(StandardNormal);
            T::lit((2.0 * a).sin() + 0.5 * (1.5 * b).cos() + 0.2 * e)
        })
        .collect();

    let count = basis_scales.len() * per_scale_count + 1;
    let mut centers = Array2::<T>::zeros((count, 2));
    let mut scales = Array1::<T>::zeros(count);
    let mut d = 0;
    for &s in basis_scales {
        for _ in 0..per_scale_count {
            let j = rng.random_range(0..n);
            centers.row_mut(d).assign(&coords.row(j));
            scales[d] = T::lit(s);
            d += 1;
        }
    }
    let nf = T::from_usize(n).unwrap();
    centers.row_mut(d).assign(&(coords.sum_axis(ndarray::Axis(0)) / nf));
    scales[d] = T::lit(100.0);

    let basis = RadialBasis { centers, scales };
    let features = basis.features(&coords);
    let mean_y = y.sum() / nf;
    let second_moment = y.dot(&y) / nf;
    let noise_var = variance(y.view());
    let ds = Dataset::new(features, y, ModelKind::LinearRegression)?;
    let prior = GaussianDist::isotropic(Array1::from_elem(count, mean_y), second_moment)?;
    let model = BayesianModel::new(Likelihood::LinearRegression { noise_var }, ds, prior)?;
    Ok(model.with_basis(basis, coords))
}

/// Synthetic logistic or Poisson regression data with `x_n ~ N(0, I_D)` and prior
/// `N(0, I)`. Without an explicit `theta` the defaults are `[3, 3, 0]` (logistic,
/// `D = 2`) and `[1, 0]` (Poisson, `D = 1`).
pub fn synth_glm_dataset<T: Scalar>(
    kind: ModelKind,
    n: usize,
    d: usize,
    theta: Option<&[f64]>,
    seed: u64,
) -> Result<BayesianModel<T>> {
    let default: &[f64] = match kind {
        ModelKind::Logistic => &[3.0, 3.0, 0.0],
        ModelKind::Poisson => &[1.0, 0.0],
        _ => return Err(Error::InvalidArgument(format!("{kind:?} is not a generalized linear model"))),
    };
    let theta = match theta {
        Some(t) => t,
        None if d + 1 == default.len() => default,
        None => {
            return Err(Error::InvalidArgument(format!(
                "no default coefficients for D = {d}; pass theta of length {}",
                d + 1
            )))
        }
    };
    if theta.len() != d + 1 {
        return Err(Error::DimensionMismatch { expected: d + 1, found: theta.len() });
    }
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Array2<f64> = normal_matrix(&mut rng, n, d);
    let mut y = Array1::<f64>::zeros(n);
    for (i, row) in x.rows().into_iter().enumerate() {
        let eta = row.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() + theta[d];
        y[i] = match kind {
            ModelKind::Logistic => {
                let p = sigmoid(eta);
                if Bernoulli::new(p).expect("probability in [0, 1]").sample(&mut rng) {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => {
                let rate = softplus(-eta);
                if rate > 0.0 {
                    Poisson::new(rate).expect("positive rate").sample(&mut rng)
                } else {
                    0.0
                }
            }
        };
    }
    let ds = Dataset::new(x.mapv(T::lit), y.mapv(T::lit), kind)?;
    BayesianModel::from_dataset(kind, ds)
}
