//! Bayesian models and their per-observation log-likelihoods, gradients and
//! Hessians.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::models::dataset::Dataset;
use crate::models::gaussian::GaussianDist;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    GaussianMean,
    LinearRegression,
    Logistic,
    Poisson,
}

impl ModelKind {
    pub fn is_conjugate(self) -> bool {
        matches!(self, ModelKind::GaussianMean | ModelKind::LinearRegression)
    }
}

/// Anything that assigns a log-likelihood `L_i(theta)` to each of its data points.
pub trait LogLikelihood<T: Scalar> {
    fn num_points(&self) -> usize;
    fn param_dim(&self) -> usize;
    fn log_likelihood(&self, i: usize, theta: ArrayView1<T>) -> Result<T>;
}

/// Observation model with its hyperparameters.
#[derive(Clone, Debug)]
pub enum Likelihood<T: Scalar> {
    /// `x_i ~ N(theta, cov)`.
    GaussianMean { cov: SpdMatrix<T> },
    /// `y_i ~ N(b_i^T alpha, noise_var)` with `b_i` the feature row.
    LinearRegression { noise_var: T },
    /// `y_i ~ Bern(sigmoid(z_i^T theta))`, labels in {-1, +1}, `z_i = [x_i, 1]`.
    Logistic,
    /// `y_i ~ Poiss(log(1 + exp(-z_i^T theta)))`, `z_i = [x_i, 1]`.
    Poisson,
}

/// Radial basis definitions `b_d(x) = exp(-||x - center_d||^2 / (2 scale_d^2))`.
#[derive(Clone, Debug)]
pub struct RadialBasis<T: Scalar> {
    pub centers: Array2<T>,
    pub scales: Array1<T>,
}

impl<T: Scalar> RadialBasis<T> {
    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Feature matrix (N x basis count) for coordinates (N x 2).
    pub fn features(&self, coords: &Array2<T>) -> Array2<T> {
        let mut out = Array2::<T>::zeros((coords.nrows(), self.len()));
        for (n, point) in coords.rows().into_iter().enumerate() {
            for d in 0..self.len() {
                let diff = &point - &self.centers.row(d);
                let s = self.scales[d];
                out[[n, d]] = (-diff.dot(&diff) / (T::lit(2.0) * s * s)).exp();
            }
        }
        out
    }
}

/// A dataset, a Gaussian prior and an observation model.
#[derive(Clone, Debug)]
pub struct BayesianModel<T: Scalar> {
    likelihood: Likelihood<T>,
    dataset: Dataset<T>,
    prior: GaussianDist<T>,
    basis: Option<RadialBasis<T>>,
    /// Raw 2-D coordinates behind radial-basis features, kept for provenance.
    coords: Option<Array2<T>>,
}

impl<T: Scalar> BayesianModel<T> {
    pub fn new(likelihood: Likelihood<T>, dataset: Dataset<T>, prior: GaussianDist<T>) -> Result<Self> {
        let model = Self { likelihood, dataset, prior, basis: None, coords: None };
        let expected = model.param_dim();
        if model.prior.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: model.prior.dim() });
        }
        match &model.likelihood {
            Likelihood::GaussianMean { cov } if cov.dim() != model.dataset.dim() => {
                return Err(Error::DimensionMismatch { expected: model.dataset.dim(), found: cov.dim() });
            }
            Likelihood::LinearRegression { noise_var } if !(*noise_var > T::zero()) => {
                return Err(Error::InvalidArgument(format!("noise variance {noise_var} must be positive")));
            }
            _ => {}
        }
        if model.dataset.dim() == 0 {
            return Err(Error::InvalidArgument("model needs at least one feature".into()));
        }
        Ok(model)
    }

    pub(crate) fn with_basis(mut self, basis: RadialBasis<T>, coords: Array2<T>) -> Self {
        self.basis = Some(basis);
        self.coords = Some(coords);
        self
    }

    /// Model with the default prior `N(0, I)`: identity likelihood covariance for
    /// `gaussian_mean`, noise variance equal to the empirical variance of `y` for
    /// linear regression.
    pub fn from_dataset(kind: ModelKind, dataset: Dataset<T>) -> Result<Self> {
        let d = dataset.dim();
        let likelihood = match kind {
            ModelKind::GaussianMean => Likelihood::GaussianMean { cov: SpdMatrix::new(Array2::eye(d))? },
            ModelKind::LinearRegression => {
                let var = variance(dataset.y().view());
                Likelihood::LinearRegression { noise_var: if var > T::zero() { var } else { T::one() } }
            }
            ModelKind::Logistic => Likelihood::Logistic,
            ModelKind::Poisson => Likelihood::Poisson,
        };
        let p = match kind {
            ModelKind::GaussianMean | ModelKind::LinearRegression => d,
            ModelKind::Logistic | ModelKind::Poisson => d + 1,
        };
        Self::new(likelihood, dataset, GaussianDist::standard(p))
    }

    pub fn kind(&self) -> ModelKind {
        match self.likelihood {
            Likelihood::GaussianMean { .. } => ModelKind::GaussianMean,
            Likelihood::LinearRegression { .. } => ModelKind::LinearRegression,
            Likelihood::Logistic => ModelKind::Logistic,
            Likelihood::Poisson => ModelKind::Poisson,
        }
    }

    pub fn likelihood(&self) -> &Likelihood<T> {
        &self.likelihood
    }

    pub fn dataset(&self) -> &Dataset<T> {
        &self.dataset
    }

    pub fn prior(&self) -> &GaussianDist<T> {
        &self.prior
    }

    pub fn basis(&self) -> Option<&RadialBasis<T>> {
        self.basis.as_ref()
    }

    pub fn coords(&self) -> Option<&Array2<T>> {
        self.coords.as_ref()
    }

    pub fn n(&self) -> usize {
        self.dataset.len()
    }

    /// Dimension of `theta`: D for the conjugate kinds, D + 1 (intercept) for GLMs.
    pub fn param_dim(&self) -> usize {
        match self.likelihood {
            Likelihood::GaussianMean { .. } | Likelihood::LinearRegression { .. } => self.dataset.dim(),
            Likelihood::Logistic | Likelihood::Poisson => self.dataset.dim() + 1,
        }
    }

    /// `z_i^T theta` with `z_i = [x_i, 1]`.
    fn linear_predictor(&self, i: usize, theta: ArrayView1<T>) -> T {
        let d = self.dataset.dim();
        let x = self.dataset.x().row(i);
        x.dot(&theta.slice(ndarray::s![..d])) + theta[d]
    }

    fn augmented(&self, i: usize) -> Array1<T> {
        let d = self.dataset.dim();
        let mut z = Array1::<T>::ones(d + 1);
        z.slice_mut(ndarray::s![..d]).assign(&self.dataset.x().row(i));
        z
    }

    fn check_theta(&self, theta: ArrayView1<T>) -> Result<()> {
        if theta.len() != self.param_dim() {
            return Err(Error::DimensionMismatch { expected: self.param_dim(), found: theta.len() });
        }
        Ok(())
    }

    fn raw_log_likelihood(&self, i: usize, theta: ArrayView1<T>) -> T {
        let half = T::lit(0.5);
        let ln_2pi = T::lit((2.0 * std::f64::consts::PI).ln());
        match &self.likelihood {
            Likelihood::GaussianMean { cov } => {
                let d = T::from_usize(cov.dim()).unwrap();
                let diff = &self.dataset.x().row(i) - &theta;
                -half * (d * ln_2pi + cov.log_det() + cov.inv_quad_form(diff.view()))
            }
            Likelihood::LinearRegression { noise_var } => {
                let r = self.dataset.y()[i] - self.dataset.x().row(i).dot(&theta);
                -half * (ln_2pi + noise_var.ln()) - r * r / (T::lit(2.0) * *noise_var)
            }
            Likelihood::Logistic => {
                let m = self.dataset.y()[i] * self.linear_predictor(i, theta);
                -softplus(-m)
            }
            Likelihood::Poisson => {
                let t = -self.linear_predictor(i, theta);
                let y = self.dataset.y()[i];
                let rate = softplus(t);
                let log_rate = log_softplus(t);
                let y_term = if y == T::zero() { T::zero() } else { y * log_rate };
                y_term - rate - ln_factorial(y)
            }
        }
    }

    /// Adds `weight * grad L_i(theta)` to `grad` and `weight * (-Hess L_i(theta))` to
    /// `neg_hess`.
    pub(crate) fn accumulate_derivatives(
        &self,
        i: usize,
        theta: ArrayView1<T>,
        weight: T,
        grad: &mut Array1<T>,
        neg_hess: &mut Array2<T>,
    ) {
        match &self.likelihood {
            Likelihood::GaussianMean { cov } => {
                let diff = &self.dataset.x().row(i) - &theta;
                grad.scaled_add(weight, &cov.solve(diff.view()));
                neg_hess.scaled_add(weight, &cov.inverse());
            }
            Likelihood::LinearRegression { noise_var } => {
                let b = self.dataset.x().row(i);
                let r = self.dataset.y()[i] - b.dot(&theta);
                grad.scaled_add(weight * r / *noise_var, &b);
                add_outer(neg_hess, b, weight / *noise_var);
            }
            Likelihood::Logistic => {
                let z = self.augmented(i);
                let y = self.dataset.y()[i];
                let m = y * z.dot(&theta);
                grad.scaled_add(weight * y * sigmoid(-m), &z);
                add_outer(neg_hess, z.view(), weight * sigmoid(m) * sigmoid(-m));
            }
            Likelihood::Poisson => {
                let z = self.augmented(i);
                let y = self.dataset.y()[i];
                let t = -z.dot(&theta);
                let rate = softplus(t);
                let s = sigmoid(t);
                let ratio = y / rate;
                let a = (ratio - T::one()) * s;
                let a_prime = -ratio / rate * s * s + (ratio - T::one()) * s * (T::one() - s);
                grad.scaled_add(-weight * a, &z);
                add_outer(neg_hess, z.view(), -weight * a_prime);
            }
        }
    }
}

impl<T: Scalar> LogLikelihood<T> for BayesianModel<T> {
    fn num_points(&self) -> usize {
        self.n()
    }

    fn param_dim(&self) -> usize {
        BayesianModel::param_dim(self)
    }

    fn log_likelihood(&self, i: usize, theta: ArrayView1<T>) -> Result<T> {
        self.check_theta(theta)?;
        if i >= self.n() {
            return Err(Error::InvalidArgument(format!("data index {i} out of range for N = {}", self.n())));
        }
        let v = self.raw_log_likelihood(i, theta);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { index: i, theta: theta.iter().map(|t| t.as_f64()).collect() })
        }
    }
}

/// `log L_i(theta)` for model data point `i`.
pub fn log_likelihood<T: Scalar>(m: &BayesianModel<T>, i: usize, theta: ArrayView1<T>) -> Result<T> {
    LogLikelihood::log_likelihood(m, i, theta)
}

fn add_outer<T: Scalar>(m: &mut Array2<T>, v: ArrayView1<T>, scale: T) {
    let n = v.len();
    for a in 0..n {
        let va = scale * v[a];
        for b in 0..n {
            m[[a, b]] += va * v[b];
        }
    }
}

pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `log(1 + e^x)` without overflow.
pub(crate) fn softplus<T: Scalar>(x: T) -> T {
    if x > T::lit(30.0) {
        x + (-x).exp()
    } else if x < T::lit(-30.0) {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `log(softplus(x))`, accurate for very negative `x`.
fn log_softplus<T: Scalar>(x: T) -> T {
    if x < T::lit(-30.0) {
        x
    } else {
        softplus(x).ln()
    }
}

/// `log(y!)` for a non-negative integer-valued `y`.
pub(crate) fn ln_factorial<T: Scalar>(y: T) -> T {
    let n = y.as_f64() as u64;
    let mut acc = 0.0f64;
    for j in 2..=n {
        acc += (j as f64).ln();
    }
    T::lit(acc)
}

pub(crate) fn variance<T: Scalar>(v: ArrayView1<T>) -> T {
    let n = v.len();
    if n == 0 {
        return T::zero();
    }
    let nf = T::from_usize(n).unwrap();
    let mean = v.sum() / nf;
    v.iter().fold(T::zero(), |acc, &x| acc + (x - mean) * (x - mean)) / nf
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn logistic_model() -> BayesianModel<f64> {
        let ds = Dataset::new(array![[0.3, -1.0], [2.0, 0.5]], array![1.0, -1.0], ModelKind::Logistic).unwrap();
        BayesianModel::from_dataset(ModelKind::Logistic, ds).unwrap()
    }

    #[test]
    fn logistic_at_zero_is_log_half() {
        let m = logistic_model();
        for i in 0..2 {
            let v = log_likelihood(&m, i, array![0.0, 0.0, 0.0].view()).unwrap();
            assert!((v - 0.5f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_mean_at_observation() {
        let ds = Dataset::new(array![[1.5, -2.0]], array![0.0], ModelKind::GaussianMean).unwrap();
        let m = BayesianModel::from_dataset(ModelKind::GaussianMean, ds).unwrap();
        let v = log_likelihood(&m, 0, array![1.5, -2.0].view()).unwrap();
        assert!((v + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn poisson_matches_direct_pmf() {
        let ds = Dataset::new(array![[0.7], [-1.2], [0.1]], array![0.0, 3.0, 1.0], ModelKind::Poisson).unwrap();
        let m = BayesianModel::from_dataset(ModelKind::Poisson, ds).unwrap();
        let theta = array![0.4, -0.3];
        for (i, (x, y)) in [(0.7f64, 0u32), (-1.2, 3), (0.1, 1)].into_iter().enumerate() {
            let eta = x * 0.4 - 0.3;
            let rate = (1.0 + (-eta).exp()).ln();
            let fact: f64 = (1..=y).map(|j| j as f64).product();
            let direct = (rate.powi(y as i32) * (-rate).exp() / fact).ln();
            let v = log_likelihood(&m, i, theta.view()).unwrap();
            assert!((v - direct).abs() < 1e-12, "{v} vs {direct}");
        }
    }

    #[test]
    fn dimension_and_index_errors() {
        let m = logistic_model();
        assert!(log_likelihood(&m, 0, array![0.0, 0.0].view()).is_err());
        assert!(log_likelihood(&m, 5, array![0.0, 0.0, 0.0].view()).is_err());
    }

    #[test]
    fn non_finite_likelihood_is_an_evaluation_error() {
        let ds = Dataset::new(array![[1.0]], array![5.0], ModelKind::Poisson).unwrap();
        let m = BayesianModel::from_dataset(ModelKind::Poisson, ds).unwrap();
        // the linear predictor overflows, so the rate's logarithm is -inf
        let err = log_likelihood(&m, 0, array![f64::MAX, f64::MAX].view()).unwrap_err();
        assert!(matches!(err, Error::Evaluation { index: 0, .. }));
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let ds = Dataset::new(array![[0.7, 0.2], [-1.2, 1.0]], array![2.0, 0.0], ModelKind::Poisson).unwrap();
        let poisson = BayesianModel::from_dataset(ModelKind::Poisson, ds).unwrap();
        let lds = Dataset::new(array![[0.7, 0.2], [-1.2, 1.0]], array![1.0, -1.0], ModelKind::Logistic).unwrap();
        let logistic = BayesianModel::from_dataset(ModelKind::Logistic, lds).unwrap();
        let rds = Dataset::new(array![[0.7, 0.2], [-1.2, 1.0]], array![1.0, -0.4], ModelKind::LinearRegression).unwrap();
        let linreg = BayesianModel::from_dataset(ModelKind::LinearRegression, rds).unwrap();
        for (m, theta) in [
            (&poisson, array![0.3, -0.2, 0.1]),
            (&logistic, array![0.3, -0.2, 0.1]),
            (&linreg, array![0.3, -0.2]),
        ] {
            let p = theta.len();
            for i in 0..2 {
                let mut g = Array1::zeros(p);
                let mut h = Array2::zeros((p, p));
                m.accumulate_derivatives(i, theta.view(), 1.0, &mut g, &mut h);
                let eps = 1e-5;
                for a in 0..p {
                    let mut tp = theta.clone();
                    tp[a] += eps;
                    let mut tm = theta.clone();
                    tm[a] -= eps;
                    let fd = (log_likelihood(m, i, tp.view()).unwrap() - log_likelihood(m, i, tm.view()).unwrap())
                        / (2.0 * eps);
                    assert!(f64::abs(fd - g[a]) < 1e-7, "grad {a}: {fd} vs {}", g[a]);
                    let mut gp = Array1::zeros(p);
                    let mut gm = Array1::zeros(p);
                    let mut scratch = Array2::zeros((p, p));
                    m.accumulate_derivatives(i, tp.view(), 1.0, &mut gp, &mut scratch);
                    m.accumulate_derivatives(i, tm.view(), 1.0, &mut gm, &mut scratch);
                    for b in 0..p {
                        let fd_h = -(gp[b] - gm[b]) / (2.0 * eps);
                        assert!(f64::abs(fd_h - h[[b, a]]) < 1e-6, "hess ({b},{a}): {fd_h} vs {}", h[[b, a]]);
                    }
                }
            }
        }
    }
}
