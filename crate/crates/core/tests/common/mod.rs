#![allow(dead_code)]

use coreset_iht::{Problem, Weights};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

pub fn normal_vector(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_simple_fn(n, || rng.sample(StandardNormal))
}

/// Gaussian `Phi` (S x n) and `y = Phi w*` for a planted non-negative `k`-sparse `w*`
/// with entries in [1, 5].
pub fn planted(seed: u64, n: usize, s: usize, k: usize) -> (Problem, Array1<f64>) {
    let mut r = rng(seed);
    let phi = normal_matrix(&mut r, s, n);
    let support = rand::seq::index::sample(&mut r, n, k).into_vec();
    let mut w = Array1::zeros(n);
    for i in support {
        w[i] = r.random_range(1.0..5.0);
    }
    let y = phi.dot(&w);
    (Problem::new(phi, y).unwrap(), w)
}

pub fn support_of(w: &Array1<f64>) -> Vec<usize> {
    w.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect()
}

/// Objective summed entry by entry.
pub fn objective_by_hand(phi: &Array2<f64>, y: &Array1<f64>, w: &[f64]) -> f64 {
    let mut total = 0.0;
    for r in 0..phi.nrows() {
        let mut pred = 0.0;
        for c in 0..phi.ncols() {
            pred += phi[[r, c]] * w[c];
        }
        total += (y[r] - pred) * (y[r] - pred);
    }
    total
}

/// Non-negative least squares by projected gradient with step `1 / (2 lambda_max)`,
/// run until successive iterates differ by at most `tol` (relative).
pub fn nnls_projected_gradient(phi: &Array2<f64>, y: &Array1<f64>, tol: f64) -> Array1<f64> {
    let gram = phi.t().dot(phi);
    let phi_t_y = phi.t().dot(y);
    // power iteration for lambda_max
    let mut v = Array1::<f64>::ones(gram.nrows());
    let mut lambda = 1.0;
    for _ in 0..500 {
        let u = gram.dot(&v);
        lambda = u.dot(&u).sqrt() / v.dot(&v).sqrt();
        v = &u / u.dot(&u).sqrt();
    }
    let step = 1.0 / (2.0 * lambda * 1.01);
    let mut w = Array1::<f64>::zeros(gram.nrows());
    for _ in 0..2_000_000 {
        let grad = (gram.dot(&w) - &phi_t_y) * 2.0;
        let next = (&w - &(grad * step)).mapv(|x| x.max(0.0));
        let diff = (&next - &w).mapv(|x| x * x).sum().sqrt();
        let size = next.mapv(|x| x * x).sum().sqrt();
        w = next;
        if diff <= tol * size.max(1e-300) {
            break;
        }
    }
    w
}

/// Best `k`-sparse non-negative least-squares fit by enumerating supports and running
/// projected gradient on each.
pub fn brute_force_nnls(phi: &Array2<f64>, y: &Array1<f64>, k: usize) -> (Array1<f64>, f64) {
    let n = phi.ncols();
    let mut best = (Array1::zeros(n), f64::INFINITY);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let sub = phi.select(ndarray::Axis(1), &idx);
        let x = nnls_projected_gradient(&sub, y, 1e-12);
        let r = y - &sub.dot(&x);
        let f = r.dot(&r);
        if f < best.1 {
            let mut w = Array1::zeros(n);
            for (a, &i) in idx.iter().enumerate() {
                w[i] = x[a];
            }
            best = (w, f);
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { break };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    best
}

pub fn dist(a: &Weights, b: &Array1<f64>) -> f64 {
    (&a.values() - b).mapv(|x| x * x).sum().sqrt()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        (values[m / 2 - 1] + values[m / 2]) / 2.0
    }
}
