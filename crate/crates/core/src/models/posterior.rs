//! Weighted posteriors: closed form for the conjugate kinds, Laplace otherwise.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::models::gaussian::GaussianDist;
use crate::models::likelihood::{BayesianModel, Likelihood};
use crate::problem::WeightVector;
use crate::scalar::Scalar;

/// Damped Newton settings for the MAP search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceOptions {
    /// Stop once the infinity norm of the log-joint gradient is at most this.
    pub tol: f64,
    pub max_steps: usize,
    pub max_halvings: usize,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_steps: 200, max_halvings: 30 }
    }
}

fn check_weights<T: Scalar>(m: &BayesianModel<T>, w: &WeightVector<T>) -> Result<()> {
    if w.len() != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), found: w.len() });
    }
    Ok(())
}

/// Closed-form posterior of a `gaussian_mean` or `linear_regression` model whose
/// likelihood terms are weighted by `w`.
pub fn conjugate_posterior<T: Scalar>(m: &BayesianModel<T>, w: &WeightVector<T>) -> Result<GaussianDist<T>> {
    check_weights(m, w)?;
    if !m.kind().is_conjugate() {
        return Err(Error::InvalidArgument(format!("{:?} has no conjugate posterior", m.kind())));
    }
    if w.nnz() == 0 {
        return Ok(m.prior().clone());
    }
    let prior = m.prior();
    let prior_prec = prior.precision();
    let mut prec = prior_prec.clone();
    let mut rhs = prior_prec.dot(prior.mean());
    let x = m.dataset().x();
    match m.likelihood() {
        Likelihood::GaussianMean { cov } => {
            let lik_prec = cov.inverse();
            let mut weighted_sum = Array1::<T>::zeros(m.param_dim());
            for &i in w.support() {
                weighted_sum.scaled_add(w.get(i), &x.row(i));
            }
            prec.scaled_add(w.sum(), &lik_prec);
            rhs += &lik_prec.dot(&weighted_sum);
        }
        Likelihood::LinearRegression { noise_var } => {
            let y = m.dataset().y();
            for &i in w.support() {
                let b = x.row(i);
                let c = w.get(i) / *noise_var;
                for a in 0..b.len() {
                    for d in 0..b.len() {
                        prec[[a, d]] += c * b[a] * b[d];
                    }
                }
                rhs.scaled_add(c * y[i], &b);
            }
        }
        Likelihood::Logistic | Likelihood::Poisson => unreachable!(),
    }
    gaussian_from_precision(prec, rhs.view())
}

/// `N(P^{-1} r, P^{-1})`.
fn gaussian_from_precision<T: Scalar>(prec: Array2<T>, rhs: ArrayView1<T>) -> Result<GaussianDist<T>> {
    let prec = SpdMatrix::from_symmetrized(prec).map_err(|_| Error::Curvature)?;
    let mean = prec.solve(rhs);
    let cov = SpdMatrix::from_symmetrized(prec.inverse()).map_err(|_| Error::Curvature)?;
    Ok(GaussianDist::from_spd(mean, cov))
}

/// Weighted log joint `log pi_0(theta) + sum_i w_i L_i(theta)`, or `None` when any
/// term is not finite.
fn log_joint<T: Scalar>(m: &BayesianModel<T>, w: &WeightVector<T>, theta: ArrayView1<T>) -> Option<T> {
    let mut acc = m.prior().log_pdf(theta);
    for &i in w.support() {
        acc += w.get(i) * crate::models::log_likelihood(m, i, theta).ok()?;
    }
    acc.is_finite().then_some(acc)
}

/// Gradient and negative Hessian of the weighted log joint.
fn derivatives<T: Scalar>(m: &BayesianModel<T>, w: &WeightVector<T>, theta: ArrayView1<T>) -> (Array1<T>, Array2<T>) {
    let prior = m.prior();
    let prior_prec = prior.precision();
    let diff = &theta - prior.mean();
    let mut grad = -prior_prec.dot(&diff);
    let mut neg_hess = prior_prec;
    for &i in w.support() {
        m.accumulate_derivatives(i, theta, w.get(i), &mut grad, &mut neg_hess);
    }
    (grad, neg_hess)
}

fn inf_norm<T: Scalar>(v: &Array1<T>) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Laplace approximation at the weighted MAP, started from the prior mean.
pub fn laplace_approximation<T: Scalar>(m: &BayesianModel<T>, w: &WeightVector<T>, tol: f64) -> Result<GaussianDist<T>> {
    let opts = LaplaceOptions { tol, ..LaplaceOptions::default() };
    laplace_with(m, w, m.prior().mean().view(), opts)
}

/// Laplace approximation with an explicit Newton starting point.
pub fn laplace_with<T: Scalar>(
    m: &BayesianModel<T>,
    w: &WeightVector<T>,
    init: ArrayView1<T>,
    opts: LaplaceOptions,
) -> Result<GaussianDist<T>> {
    check_weights(m, w)?;
    if init.len() != m.param_dim() {
        return Err(Error::DimensionMismatch { expected: m.param_dim(), found: init.len() });
    }
    if w.nnz() == 0 {
        return Ok(m.prior().clone());
    }
    let tol = T::lit(opts.tol);
    let mut theta = init.to_owned();
    let mut value = log_joint(m, w, theta.view()).ok_or_else(|| Error::Evaluation {
        index: 0,
        theta: theta.iter().map(|t| t.as_f64()).collect(),
    })?;
    for _ in 0..=opts.max_steps {
        let (grad, neg_hess) = derivatives(m, w, theta.view());
        let gnorm = inf_norm(&grad);
        if gnorm <= tol {
            let cov = SpdMatrix::from_symmetrized(neg_hess)
                .map_err(|_| Error::Curvature)?
                .inverse();
            let cov = SpdMatrix::from_symmetrized(cov).map_err(|_| Error::Curvature)?;
            return Ok(GaussianDist::from_spd(theta, cov));
        }
        let direction = match SpdMatrix::from_symmetrized(neg_hess) {
            Ok(h) => h.solve(grad.view()),
            // log joints of all supported kinds are concave; fall back to ascent anyway
            Err(_) => grad.clone(),
        };
        // rounding allowance: near the optimum the log joint is flat to machine precision
        let slack = T::epsilon() * T::lit(64.0) * (T::one() + value.abs());
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let candidate = &theta + &(&direction * step);
            if let Some(v) = log_joint(m, w, candidate.view()) {
                if v >= value - slack {
                    theta = candidate;
                    value = v.max(value);
                    accepted = true;
                    break;
                }
            }
            step *= T::lit(0.5);
        }
        if !accepted {
            return Err(Error::Convergence { grad_norm: gnorm.as_f64() });
        }
    }
    let (grad, _) = derivatives(m, w, theta.view());
    Err(Error::Convergence { grad_norm: inf_norm(&grad).as_f64() })
}

/// Weighted posterior: closed form when conjugate, Laplace (tolerance `1e-8`)
/// otherwise.
pub fn posterior<T: Scalar>(m: &BayesianModel<T>, w: &WeightVector<T>) -> Result<GaussianDist<T>> {
    if m.kind().is_conjugate() {
        conjugate_posterior(m, w)
    } else {
        laplace_approximation(m, w, LaplaceOptions::default().tol)
    }
}

/// Weighted MAP estimate, i.e. the mean of [`posterior`].
pub fn map_estimate<T: Scalar>(m: &BayesianModel<T>, w: &WeightVector<T>) -> Result<Array1<T>> {
    Ok(posterior(m, w)?.mean().clone())
}
