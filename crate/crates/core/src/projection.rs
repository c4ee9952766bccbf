//! Euclidean projections onto the sparse / non-negative constraint sets.
//!
//! All top-k selections break ties by the lowest index, so every projection is
//! a deterministic function of its input.

use std::cmp::Ordering;

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::problem::WeightVector;
use crate::scalar::Scalar;

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!("sparsity k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    Ok(())
}

/// Larger key first, then lower index.
fn rank<T: Scalar>(a: &(T, usize), b: &(T, usize)) -> Ordering {
    b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
}

/// Keeps the `k` best `(key, index)` candidates and returns their indices ascending.
/// Linear time on average (quickselect) plus `O(k log k)` for the final sort.
fn select_top<T: Scalar>(mut candidates: Vec<(T, usize)>, k: usize) -> Vec<usize> {
    if candidates.len() > k {
        candidates.select_nth_unstable_by(k - 1, rank);
        candidates.truncate(k);
    }
    let mut idx: Vec<usize> = candidates.into_iter().map(|(_, i)| i).collect();
    idx.sort_unstable();
    idx
}

/// Projection onto `C_k ∩ R^n_+`: drop negative entries, keep the `k` largest of the
/// rest. Zero entries never enter the support.
pub fn project_topk_nonneg<T: Scalar>(v: ArrayView1<T>, k: usize) -> Result<WeightVector<T>> {
    let n = v.len();
    check_k(k, n)?;
    let candidates: Vec<(T, usize)> = v
        .iter()
        .enumerate()
        .filter(|(_, x)| **x > T::zero())
        .map(|(i, x)| (*x, i))
        .collect();
    let support = select_top(candidates, k);
    let mut w = Array1::<T>::zeros(n);
    for &i in &support {
        w[i] = v[i];
    }
    Ok(WeightVector::from_parts(w, support))
}

/// Support of `Pi_{C_k \ Z}(v)`: indices of the `k` largest-magnitude nonzero entries of
/// `v` outside `excluded`, ascending. Fewer than `k` when candidates run out.
pub fn project_topk_excluding<T: Scalar>(
    v: ArrayView1<T>,
    k: usize,
    excluded: &[usize],
) -> Result<Vec<usize>> {
    let n = v.len();
    check_k(k, n)?;
    let mut blocked = vec![false; n];
    for &i in excluded {
        if i >= n {
            return Err(Error::InvalidArgument(format!("excluded index {i} out of range for n = {n}")));
        }
        blocked[i] = true;
    }
    let candidates: Vec<(T, usize)> = v
        .iter()
        .enumerate()
        .filter(|(i, x)| !blocked[*i] && **x != T::zero())
        .map(|(i, x)| (x.abs(), i))
        .collect();
    Ok(select_top(candidates, k))
}

/// `v|_S`: zero every entry outside `support`.
pub fn restrict<T: Scalar>(v: ArrayView1<T>, support: &[usize]) -> Result<Array1<T>> {
    let n = v.len();
    let mut out = Array1::<T>::zeros(n);
    for &i in support {
        if i >= n {
            return Err(Error::InvalidArgument(format!("support index {i} out of range for n = {n}")));
        }
        out[i] = v[i];
    }
    Ok(out)
}

/// Projection onto the non-negative orthant.
pub fn project_nonneg<T: Scalar>(v: ArrayView1<T>) -> WeightVector<T> {
    let w = v.mapv(|x| if x > T::zero() { x } else { T::zero() });
    let support = w
        .iter()
        .enumerate()
        .filter(|(_, x)| **x > T::zero())
        .map(|(i, _)| i)
        .collect();
    WeightVector::from_parts(w, support)
}

/// Sorted union of two ascending index sets.
pub(crate) fn union_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn topk_nonneg_basic() {
        let w = project_topk_nonneg(array![3.0, -5.0, 1.0, 2.0].view(), 2).unwrap();
        assert_eq!(w.values(), array![3.0, 0.0, 0.0, 2.0].view());
        assert_eq!(w.support(), &[0, 3]);
    }

    #[test]
    fn topk_nonneg_feasible_is_fixed_point() {
        let v = array![0.0, 1.5, 0.0, 0.2, 0.0];
        let w = project_topk_nonneg(v.view(), 2).unwrap();
        assert_eq!(w.values(), v.view());
    }

    #[test]
    fn topk_nonneg_all_negative() {
        let w = project_topk_nonneg(array![-1.0, -2.0, -0.5].view(), 2).unwrap();
        assert!(w.values().iter().all(|x| *x == 0.0));
        assert!(w.support().is_empty());
    }

    #[test]
    fn topk_nonneg_ties_prefer_low_index() {
        let w = project_topk_nonneg(array![1.0, 2.0, 1.0, 2.0, 1.0].view(), 3).unwrap();
        assert_eq!(w.support(), &[0, 1, 3]);
    }

    #[test]
    fn topk_nonneg_zeros_never_in_support() {
        let w = project_topk_nonneg(array![0.0, 4.0, 0.0].view(), 3).unwrap();
        assert_eq!(w.support(), &[1]);
    }

    #[test]
    fn topk_rejects_bad_k() {
        assert!(project_topk_nonneg(array![1.0, 2.0].view(), 0).is_err());
        assert!(project_topk_nonneg(array![1.0, 2.0].view(), 3).is_err());
        assert!(project_topk_excluding(array![1.0].view(), 2, &[]).is_err());
    }

    #[test]
    fn excluding_ranks_by_magnitude() {
        let s = project_topk_excluding(array![5.0, 1.0, -7.0, 2.0].view(), 2, &[0]).unwrap();
        assert_eq!(s, vec![2, 3]);
    }

    #[test]
    fn excluding_everything_is_empty() {
        let s = project_topk_excluding(array![5.0, 1.0, -7.0].view(), 2, &[0, 1, 2]).unwrap();
        assert!(s.is_empty());
        assert!(project_topk_excluding(array![5.0].view(), 1, &[3]).is_err());
    }

    #[test]
    fn restrict_cases() {
        let v = array![1.0, 2.0, 3.0];
        assert_eq!(restrict(v.view(), &[0, 1, 2]).unwrap(), v);
        assert_eq!(restrict(v.view(), &[]).unwrap(), array![0.0, 0.0, 0.0]);
        assert_eq!(restrict(v.view(), &[1]).unwrap(), array![0.0, 2.0, 0.0]);
        assert!(restrict(v.view(), &[3]).is_err());
    }

    #[test]
    fn union_merges() {
        assert_eq!(union_sorted(&[1, 4, 7], &[2, 4, 9]), vec![1, 2, 4, 7, 9]);
    }
}
