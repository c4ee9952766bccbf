use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::scalar::Scalar;

/// Multivariate normal `N(mean, cov)` with a cached Cholesky factor.
#[derive(Clone, Debug)]
pub struct GaussianDist<T: Scalar> {
    mean: Array1<T>,
    cov: SpdMatrix<T>,
}

impl<T: Scalar> GaussianDist<T> {
    /// Fails unless `cov` is symmetric (to `1e-10`) and positive definite.
    pub fn new(mean: Array1<T>, cov: Array2<T>) -> Result<Self> {
        if cov.nrows() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), found: cov.nrows() });
        }
        Ok(Self { mean, cov: SpdMatrix::new(cov)? })
    }

    pub(crate) fn from_spd(mean: Array1<T>, cov: SpdMatrix<T>) -> Self {
        Self { mean, cov }
    }

    /// `N(0, I_d)`.
    pub fn standard(d: usize) -> Self {
        Self::isotropic(Array1::zeros(d), T::one()).expect("identity covariance is positive definite")
    }

    /// `N(mean, variance * I)`.
    pub fn isotropic(mean: Array1<T>, variance: T) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, Array2::eye(d) * variance)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Array1<T> {
        &self.mean
    }

    pub fn cov(&self) -> &Array2<T> {
        self.cov.matrix()
    }

    pub fn cov_spd(&self) -> &SpdMatrix<T> {
        &self.cov
    }

    pub fn precision(&self) -> Array2<T> {
        self.cov.inverse()
    }

    pub fn log_det_cov(&self) -> T {
        self.cov.log_det()
    }

    pub fn log_pdf(&self, x: ArrayView1<T>) -> T {
        let d = T::from_usize(self.dim()).unwrap();
        let diff = &x - &self.mean;
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        -T::lit(0.5) * (d * two_pi.ln() + self.log_det_cov() + self.cov.inv_quad_form(diff.view()))
    }

    /// Draws `mean + L e` with `e` standard normal (drawn in `f64`).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Array1<T> {
        let e: Array1<T> = (0..self.dim()).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect();
        &self.mean + &self.cov.cholesky_factor().dot(&e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_non_pd() {
        assert!(GaussianDist::new(array![0.0, 0.0], array![[1.0, 2.0], [2.0, 1.0]]).is_err());
        assert!(GaussianDist::new(array![0.0], array![[1.0, 0.0], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn standard_log_pdf_at_origin() {
        let g = GaussianDist::<f64>::standard(2);
        let expected = -(2.0 * std::f64::consts::PI).ln();
        assert!((g.log_pdf(array![0.0, 0.0].view()) - expected).abs() < 1e-14);
    }
}
