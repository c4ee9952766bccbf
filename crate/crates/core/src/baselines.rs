use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::WeightVector;
use crate::scalar::Scalar;

/// Uniform random coreset: `k` indices drawn without replacement, each weighted
/// `n / k` so the weighted log-likelihood is unbiased for the full one.
pub fn uniform_coreset<T: Scalar>(n: usize, k: usize, seed: u64) -> Result<WeightVector<T>> {
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!("sparsity k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = T::from_usize(n).unwrap() / T::from_usize(k).unwrap();
    let mut w = Array1::<T>::zeros(n);
    for i in rand::seq::index::sample(&mut rng, n, k) {
        w[i] = weight;
    }
    WeightVector::new(w)
}
