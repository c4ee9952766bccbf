//! The finite-dimensional sparse regression problem `min ||y - Phi w||^2`
//! subject to `||w||_0 <= k, w >= 0`, and the coreset weight vector.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Design matrix `Phi` (S x n, one column per data point) and target `y` (length S).
///
/// The matrix is stored transposed (n x S, row-major) so that every column of
/// `Phi` is a contiguous slice; both `Phi x` for sparse `x` and `Phi^T r` then
/// stream over contiguous memory.
#[derive(Clone, Debug)]
pub struct SparseRegressionProblem<T: Scalar> {
    phi_t: Array2<T>,
    y: Array1<T>,
}

impl<T: Scalar> SparseRegressionProblem<T> {
    /// `phi` has shape `(S, n)`; `y` has length `S`.
    pub fn new(phi: Array2<T>, y: Array1<T>) -> Result<Self> {
        let (s, n) = phi.dim();
        if s == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "problem needs S >= 1 and n >= 1, got S = {s}, n = {n}"
            )));
        }
        if y.len() != s {
            return Err(Error::DimensionMismatch { expected: s, found: y.len() });
        }
        if phi.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("problem data contains non-finite entries".into()));
        }
        let phi_t = phi.reversed_axes().as_standard_layout().into_owned();
        Ok(Self { phi_t, y })
    }

    /// Builds the coreset problem from projected log-likelihood columns: `y` is the
    /// column sum of `phi`.
    pub fn from_columns(phi: Array2<T>) -> Result<Self> {
        let y = phi.sum_axis(Axis(1));
        Self::new(phi, y)
    }

    /// Number of data points (columns).
    pub fn n(&self) -> usize {
        self.phi_t.nrows()
    }

    /// Number of posterior samples (rows).
    pub fn s_dim(&self) -> usize {
        self.phi_t.ncols()
    }

    /// `Phi` as an S x n view.
    pub fn phi(&self) -> ArrayView2<'_, T> {
        self.phi_t.t()
    }

    pub fn y(&self) -> ArrayView1<'_, T> {
        self.y.view()
    }

    pub fn column(&self, i: usize) -> ArrayView1<'_, T> {
        self.phi_t.row(i)
    }

    /// `Phi x`, skipping the zero entries of `x`.
    pub fn apply(&self, x: ArrayView1<T>) -> Array1<T> {
        let mut out = Array1::<T>::zeros(self.s_dim());
        for (i, &xi) in x.iter().enumerate() {
            if xi != T::zero() {
                out.scaled_add(xi, &self.phi_t.row(i));
            }
        }
        out
    }

    /// `Phi x` for `x` supported on `support`.
    pub fn apply_on(&self, x: ArrayView1<T>, support: &[usize]) -> Array1<T> {
        let mut out = Array1::<T>::zeros(self.s_dim());
        for &i in support {
            let xi = x[i];
            if xi != T::zero() {
                out.scaled_add(xi, &self.phi_t.row(i));
            }
        }
        out
    }

    /// `Phi^T r`.
    pub fn apply_transpose(&self, r: ArrayView1<T>) -> Array1<T> {
        self.phi_t.dot(&r)
    }

    /// `y - Phi x`.
    pub fn residual(&self, x: ArrayView1<T>) -> Array1<T> {
        &self.y - &self.apply(x)
    }

    /// `||y - Phi x||^2` for an arbitrary dense `x`.
    pub fn objective_at(&self, x: ArrayView1<T>) -> T {
        let r = self.residual(x);
        r.dot(&r)
    }

    /// `-2 Phi^T (y - Phi x)` for an arbitrary dense `x`.
    pub fn gradient_at(&self, x: ArrayView1<T>) -> Array1<T> {
        let r = self.residual(x);
        self.apply_transpose(r.view()) * T::lit(-2.0)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: len });
        }
        Ok(())
    }
}

/// Dense non-negative weight vector with its support (indices of nonzero entries,
/// ascending).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T: Scalar> {
    w: Array1<T>,
    support: Vec<usize>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(w: Array1<T>) -> Result<Self> {
        if let Some(i) = w.iter().position(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "weight {i} is {} (weights must be finite and non-negative)",
                w[i]
            )));
        }
        let support = w
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, _)| i)
            .collect();
        Ok(Self { w, support })
    }

    pub fn zeros(n: usize) -> Self {
        Self { w: Array1::zeros(n), support: Vec::new() }
    }

    pub fn ones(n: usize) -> Self {
        Self { w: Array1::ones(n), support: (0..n).collect() }
    }

    /// Internal constructor for vectors produced by a projection, where
    /// non-negativity and the support are known.
    pub(crate) fn from_parts(w: Array1<T>, support: Vec<usize>) -> Self {
        debug_assert!(support.windows(2).all(|p| p[0] < p[1]));
        debug_assert!(support.iter().all(|&i| w[i] > T::zero()));
        Self { w, support }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Number of nonzero weights.
    pub fn nnz(&self) -> usize {
        self.support.len()
    }

    pub fn values(&self) -> ArrayView1<'_, T> {
        self.w.view()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn get(&self, i: usize) -> T {
        self.w[i]
    }

    pub fn into_inner(self) -> Array1<T> {
        self.w
    }

    pub fn sum(&self) -> T {
        self.support.iter().fold(T::zero(), |acc, &i| acc + self.w[i])
    }
}

/// `f(w) = ||y - Phi w||_2^2`.
pub fn objective<T: Scalar>(p: &SparseRegressionProblem<T>, w: &WeightVector<T>) -> Result<T> {
    p.check_len(w.len())?;
    let r = &p.y - &p.apply_on(w.values(), w.support());
    Ok(r.dot(&r))
}

/// `grad f(w) = -2 Phi^T (y - Phi w)`.
pub fn gradient<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    w: &WeightVector<T>,
) -> Result<Array1<T>> {
    p.check_len(w.len())?;
    Ok(p.gradient_at(w.values()))
}
