//! Small dense linear algebra kernels: Cholesky, triangular solves and a
//! Jacobi eigenvalue solver for symmetric matrices.
//!
//! Matrices here are at most a few hundred rows (posterior covariances,
//! restricted Gram matrices), so straightforward O(D^3) routines suffice.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor `L` with `a = L L^T`.
pub fn cholesky<T: Scalar>(a: ArrayView2<T>) -> Result<Array2<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for m in 0..j {
            d -= l[[j, m]] * l[[j, m]];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite(format!("pivot {j} is {d}")));
        }
        let ljj = d.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for m in 0..j {
                s -= l[[i, m]] * l[[j, m]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower<T: Scalar>(l: ArrayView2<T>, b: ArrayView1<T>) -> Array1<T> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for i in 0..n {
        let mut s = x[i];
        for m in 0..i {
            s -= l[[i, m]] * x[m];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solves `L^T x = b` for lower-triangular `L`.
pub fn solve_lower_transpose<T: Scalar>(l: ArrayView2<T>, b: ArrayView1<T>) -> Array1<T> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for i in (0..n).rev() {
        let mut s = x[i];
        for m in (i + 1)..n {
            s -= l[[m, i]] * x[m];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Symmetric positive-definite matrix together with its Cholesky factor.
#[derive(Clone, Debug)]
pub struct SpdMatrix<T: Scalar> {
    matrix: Array2<T>,
    chol: Array2<T>,
}

impl<T: Scalar> SpdMatrix<T> {
    /// Validates symmetry (absolute tolerance `1e-10` scaled by the largest entry) and
    /// factorises.
    pub fn new(matrix: Array2<T>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.ncols() });
        }
        let scale = matrix.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
        let tol = T::lit(1e-10) * scale;
        for i in 0..n {
            for j in 0..i {
                if (matrix[[i, j]] - matrix[[j, i]]).abs() > tol {
                    return Err(Error::Validation(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let chol = cholesky(matrix.view())?;
        Ok(Self { matrix, chol })
    }

    /// Builds from a matrix that is symmetric by construction, copying the lower
    /// triangle over the upper one first.
    pub fn from_symmetrized(mut matrix: Array2<T>) -> Result<Self> {
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..i {
                let v = (matrix[[i, j]] + matrix[[j, i]]) * T::lit(0.5);
                matrix[[i, j]] = v;
                matrix[[j, i]] = v;
            }
        }
        Self::new(matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<T> {
        &self.matrix
    }

    pub fn cholesky_factor(&self) -> &Array2<T> {
        &self.chol
    }

    pub fn solve(&self, b: ArrayView1<T>) -> Array1<T> {
        let z = solve_lower(self.chol.view(), b);
        solve_lower_transpose(self.chol.view(), z.view())
    }

    pub fn inverse(&self) -> Array2<T> {
        let n = self.dim();
        let mut inv = Array2::<T>::zeros((n, n));
        let mut e = Array1::<T>::zeros(n);
        for j in 0..n {
            e.fill(T::zero());
            e[j] = T::one();
            inv.column_mut(j).assign(&self.solve(e.view()));
        }
        // exact symmetry
        for i in 0..n {
            for j in 0..i {
                let v = (inv[[i, j]] + inv[[j, i]]) * T::lit(0.5);
                inv[[i, j]] = v;
                inv[[j, i]] = v;
            }
        }
        inv
    }

    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        self.chol.diag().iter().fold(T::zero(), |acc, &d| acc + two * d.ln())
    }

    /// `x^T A^{-1} x`.
    pub fn inv_quad_form(&self, x: ArrayView1<T>) -> T {
        let z = solve_lower(self.chol.view(), x);
        z.dot(&z)
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted ascending.
pub fn symmetric_eigenvalues<T: Scalar>(a: ArrayView2<T>) -> Vec<T> {
    let n = a.nrows();
    let mut m = a.to_owned();
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += m[[i, i]] * m[[i, i]];
            for j in 0..n {
                if i != j {
                    off += m[[i, j]] * m[[i, j]];
                }
            }
        }
        if off <= eps * eps * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut vals: Vec<T> = (0..n).map(|i| m[[i, i]]).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

/// Squared Euclidean norm.
pub fn norm_sq<T: Scalar>(v: ArrayView1<T>) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x)
}

pub fn norm<T: Scalar>(v: ArrayView1<T>) -> T {
    norm_sq(v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_reconstructs() {
        let a = array![[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]];
        let l = cholesky(a.view()).unwrap();
        let back = l.dot(&l.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert!(f64::abs(x - y) < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(cholesky(a.view()), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn spd_inverse_and_logdet() {
        let a = array![[2.0, 0.5], [0.5, 1.0]];
        let spd = SpdMatrix::new(a.clone()).unwrap();
        let inv = spd.inverse();
        let id = a.dot(&inv);
        assert!(f64::abs(id[[0, 0]] - 1.0) < 1e-12 && f64::abs(id[[0, 1]]) < 1e-12);
        assert!((spd.log_det() - (1.75f64).ln()).abs() < 1e-12);
        let x = array![1.0, -1.0];
        let direct = x.dot(&inv.dot(&x));
        assert!((spd.inv_quad_form(x.view()) - direct).abs() < 1e-12);
    }

    #[test]
    fn spd_rejects_asymmetric() {
        let a = array![[2.0, 0.5], [0.4, 1.0]];
        assert!(matches!(SpdMatrix::new(a), Err(Error::Validation(_))));
    }

    #[test]
    fn jacobi_matches_2x2_closed_form() {
        let a = array![[3.0, 1.0], [1.0, 2.0]];
        let ev = symmetric_eigenvalues(a.view());
        let disc = (0.25f64 + 1.0).sqrt();
        assert!((ev[0] - (2.5 - disc)).abs() < 1e-12);
        assert!((ev[1] - (2.5 + disc)).abs() < 1e-12);
    }

    #[test]
    fn jacobi_trace_and_diagonal() {
        let a = array![[1.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 2.0]];
        assert_eq!(symmetric_eigenvalues(a.view()), vec![1.0, 2.0, 4.0]);
    }
}
