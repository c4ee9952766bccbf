mod common;

use coreset_iht::models::{
    build_projection, conjugate_posterior, laplace_approximation, laplace_with, log_likelihood, read_csv_dataset,
    save_csv_dataset, load_csv_dataset, synth_gaussian_dataset, synth_glm_dataset, synth_radial_basis_model,
    write_csv_dataset, BayesianModel, Dataset, GaussianDist, LaplaceOptions, ModelKind, DEFAULT_BASIS_SCALES,
};
use coreset_iht::{Error, Weights};
use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};

fn random_weights(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> Weights {
    Weights::new(Array1::from_shape_simple_fn(n, || if r.random_bool(0.4) { 0.0 } else { r.random_range(0.0..3.0) }))
        .unwrap()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[test]
fn conjugate_posterior_obeys_bayes_rule_pointwise() {
    let mut r = common::rng(1);
    let x = common::normal_matrix(&mut r, 6, 1);
    let y = common::normal_vector(&mut r, 6);
    let lin = BayesianModel::from_dataset(ModelKind::LinearRegression, Dataset::new(x.clone(), y, ModelKind::LinearRegression).unwrap())
        .unwrap();
    let gm = BayesianModel::from_dataset(ModelKind::GaussianMean, Dataset::new(x, Array1::zeros(6), ModelKind::GaussianMean).unwrap())
        .unwrap();
    for m in [&lin, &gm] {
        let w = random_weights(&mut r, 6);
        let post = conjugate_posterior(m, &w).unwrap();
        let ratio = |t: f64| {
            let theta = array![t];
            let lik: f64 = (0..6).map(|i| w.get(i) * log_likelihood(m, i, theta.view()).unwrap()).sum();
            post.log_pdf(theta.view()) - m.prior().log_pdf(theta.view()) - lik
        };
        let base = ratio(-1.0);
        for t in [-0.5, 0.0, 0.7, 1.9] {
            assert!((ratio(t) - base).abs() < 1e-8, "{} vs {base}", ratio(t));
        }
    }
}

#[test]
fn laplace_is_exact_on_conjugate_models() {
    let mut r = common::rng(2);
    let (gm, _) = synth_gaussian_dataset::<f64>(3, 15, 4).unwrap();
    let rb = synth_radial_basis_model::<f64>(30, &[0.5, 1.0], 2, 8).unwrap();
    for m in [&gm, &rb] {
        for _ in 0..10 {
            let w = random_weights(&mut r, m.n());
            let exact = conjugate_posterior(m, &w).unwrap();
            let lap = laplace_approximation(m, &w, 1e-8).unwrap();
            for (a, b) in exact.mean().iter().zip(lap.mean()) {
                assert!((a - b).abs() < 1e-8);
            }
            for (a, b) in exact.cov().iter().zip(lap.cov()) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn laplace_zero_weights_is_prior() {
    let m = synth_glm_dataset::<f64>(ModelKind::Logistic, 20, 2, None, 1).unwrap();
    let lap = laplace_approximation(&m, &Weights::zeros(20), 1e-8).unwrap();
    assert_eq!(lap.mean(), m.prior().mean());
    assert_eq!(lap.cov(), m.prior().cov());
}

#[test]
fn logistic_map_is_stationary_and_start_independent() {
    let m = synth_glm_dataset::<f64>(ModelKind::Logistic, 20, 2, None, 6).unwrap();
    let w = Weights::ones(20);
    let lap = laplace_approximation(&m, &w, 1e-8).unwrap();
    let theta = lap.mean();
    // gradient of the log joint, written out independently
    let mut grad = -theta.clone();
    for i in 0..20 {
        let x = m.dataset().x().row(i);
        let y = m.dataset().y()[i];
        let z = array![x[0], x[1], 1.0];
        grad.scaled_add(y * sigmoid(-y * z.dot(theta)), &z);
    }
    assert!(grad.iter().all(|g| g.abs() <= 1e-8), "{grad}");

    let mut r = common::rng(60);
    for _ in 0..5 {
        let init = common::normal_vector(&mut r, 3) * 3.0;
        let other = laplace_with(&m, &w, init.view(), LaplaceOptions::default()).unwrap();
        assert!((other.mean() - theta).iter().all(|d| d.abs() < 1e-6));
    }
}

#[test]
fn poisson_laplace_converges() {
    let m = synth_glm_dataset::<f64>(ModelKind::Poisson, 60, 1, None, 2).unwrap();
    let lap = laplace_approximation(&m, &Weights::ones(60), 1e-8).unwrap();
    assert!(lap.mean().iter().all(|v| v.is_finite()));
}

#[test]
fn laplace_reports_non_convergence() {
    let m = synth_glm_dataset::<f64>(ModelKind::Logistic, 20, 2, None, 6).unwrap();
    let opts = LaplaceOptions { max_steps: 0, ..LaplaceOptions::default() };
    let err = laplace_with(&m, &Weights::ones(20), array![5.0, -5.0, 5.0].view(), opts).unwrap_err();
    assert!(matches!(err, Error::Convergence { grad_norm } if grad_norm > 1e-8));
}

#[test]
fn projection_norm_estimates_likelihood_variance() {
    // L(theta) = -log(2 pi)/2 - (x - theta)^2 / 2 with theta ~ N(m, s^2): the squared
    // term is a scaled noncentral chi-square, Var = (2 s^4 + 4 a^2 s^2) / 4, a = m - x
    let x = 0.8;
    let ds = Dataset::new(array![[x]], array![0.0], ModelKind::GaussianMean).unwrap();
    let model = BayesianModel::from_dataset(ModelKind::GaussianMean, ds).unwrap();
    let (m, s): (f64, f64) = (0.3, 1.4);
    let pi_hat = GaussianDist::new(array![m], array![[s * s]]).unwrap();
    let count = 100_000;
    let ps = build_projection(&model, &pi_hat, count, 77).unwrap();
    let col = ps.phi.column(0);
    let estimate = col.dot(&col);
    let a: f64 = m - x;
    let exact = (2.0 * s.powi(4) + 4.0 * a * a * s * s) / 4.0;
    let centered_sq = col.mapv(|v| v * v * count as f64);
    let spread = centered_sq.mapv(|v| (v - estimate) * (v - estimate)).sum() / count as f64;
    let se = (spread / count as f64).sqrt();
    assert!((estimate - exact).abs() <= 3.0 * se, "{estimate} vs {exact} (se {se})");
}

#[test]
fn projection_error_shrinks_at_monte_carlo_rate() {
    // || L - L_w ||^2 for a 1-D Gaussian mean model is the variance of a quadratic in theta
    let xs = [0.4, -1.1, 2.0, 0.3];
    let ds = Dataset::new(Array2::from_shape_vec((4, 1), xs.to_vec()).unwrap(), Array1::zeros(4), ModelKind::GaussianMean)
        .unwrap();
    let model = BayesianModel::from_dataset(ModelKind::GaussianMean, ds).unwrap();
    let w = array![2.0, 0.0, 1.5, 0.0];
    let c: Vec<f64> = (0..4).map(|i| 1.0 - w[i]).collect();
    let (m, s): (f64, f64) = (0.5, 0.9);
    let pi_hat = GaussianDist::new(array![m], array![[s * s]]).unwrap();
    let quad = -0.5 * c.iter().sum::<f64>();
    let lin: f64 = c.iter().zip(xs).map(|(ci, xi)| ci * xi).sum();
    let var_sq = 2.0 * s.powi(4) + 4.0 * m * m * s * s;
    let exact = quad * quad * var_sq + lin * lin * s * s + 2.0 * quad * lin * 2.0 * m * s * s;

    let sizes = [100usize, 1_000, 10_000, 100_000];
    let reps = 20;
    let mut points = Vec::new();
    for &size in &sizes {
        let mut err = 0.0;
        for rep in 0..reps {
            let ps = build_projection(&model, &pi_hat, size, 1000 + rep).unwrap();
            let p = ps.to_problem().unwrap();
            err += (p.objective_at(w.view()) - exact).abs();
        }
        points.push(((size as f64).ln(), (err / reps as f64).ln()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    assert!(r2 >= 0.9, "R^2 = {r2}");
    assert!((slope + 0.5).abs() < 0.2, "slope = {slope}");
}

#[test]
fn synthetic_gaussian_posterior_is_conjugate_posterior() {
    let (m, post) = synth_gaussian_dataset::<f64>(4, 25, 3).unwrap();
    let direct = conjugate_posterior(&m, &Weights::ones(25)).unwrap();
    assert_eq!(post.mean(), direct.mean());
    assert_eq!(post.cov(), direct.cov());
}

#[test]
fn logistic_label_balance_matches_generative_model() {
    let n = 4000;
    let m = synth_glm_dataset::<f64>(ModelKind::Logistic, n, 2, None, 12).unwrap();
    let positive = m.dataset().y().iter().filter(|v| **v > 0.0).count() as f64 / n as f64;
    // Monte Carlo estimate of P(y = 1) under the generative model
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let draws = 1_000_000;
    let mut acc = 0.0;
    for _ in 0..draws {
        let x0: f64 = r.sample(rand_distr::StandardNormal);
        let x1: f64 = r.sample(rand_distr::StandardNormal);
        acc += sigmoid(3.0 * x0 + 3.0 * x1);
    }
    let p = acc / draws as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    assert!((positive - p).abs() <= 3.0 * sigma, "{positive} vs {p}");
}

#[test]
fn csv_round_trip_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let models = [
        synth_gaussian_dataset::<f64>(3, 7, 1).unwrap().0,
        synth_radial_basis_model::<f64>(9, &DEFAULT_BASIS_SCALES, 1, 2).unwrap(),
        synth_glm_dataset::<f64>(ModelKind::Logistic, 11, 2, None, 3).unwrap(),
        synth_glm_dataset::<f64>(ModelKind::Poisson, 13, 1, None, 4).unwrap(),
    ];
    for m in &models {
        let path = dir.path().join("data.csv");
        save_csv_dataset(&path, m.dataset(), m.kind()).unwrap();
        let back = load_csv_dataset::<f64>(&path, m.kind()).unwrap();
        assert_eq!(&back, m.dataset());
        let mut buf = Vec::new();
        write_csv_dataset(&mut buf, m.dataset(), m.kind()).unwrap();
        assert_eq!(read_csv_dataset::<f64, _>(buf.as_slice(), m.kind()).unwrap(), back);
    }
}

#[test]
fn likelihood_examples() {
    let m = synth_glm_dataset::<f64>(ModelKind::Logistic, 5, 2, None, 3).unwrap();
    for i in 0..5 {
        assert!((log_likelihood(&m, i, Array1::zeros(3).view()).unwrap() - 0.5f64.ln()).abs() < 1e-15);
    }
}
