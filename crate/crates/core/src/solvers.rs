//! Iterative hard thresholding solvers for the non-negative k-sparse least-squares
//! problem.
//!
//! * [`solve_vanilla_iht`]: fixed-step projected gradient descent.
//! * [`solve_aiht`]: accelerated IHT with active subspace expansion, exact line
//!   search for the step size and an automatically chosen momentum coefficient.
//! * [`solve_aiht2`]: as above plus a de-bias step restricted to the current support.
//! * [`solve_aiht_batched`]: A-IHT with an unbiased mini-batch gradient estimator.
//!
//! Every solver starts from `w_0 = z_0 = 0` and stops when
//! `||w_{t+1} - w_t||_2 <= rel_tol * ||w_{t+1}||_2`, after `max_iters` iterations, or
//! after two consecutive iterations whose restricted gradient is annihilated by `Phi`.

use std::io::Write;
use std::time::Instant;

use ndarray::{Array1, ArrayView1};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm_sq;
use crate::problem::{SparseRegressionProblem, WeightVector};
use crate::projection::{project_nonneg, project_topk_excluding, project_topk_nonneg, restrict, union_sorted};
use crate::scalar::Scalar;

/// Closed form used for the momentum coefficient `tau`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumRule {
    /// `<y - Phi w_next, Phi d> / ||Phi d||^2`, the exact minimiser along `d`.
    #[default]
    ExactArgmin,
    /// Half of the exact minimiser.
    HalfArgmin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sparsity budget.
    pub k: usize,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub momentum: MomentumRule,
    /// Fraction of columns used by the stochastic gradient (1 = full gradient).
    pub batch_fraction: f64,
    pub rng_seed: u64,
    /// Record per-iteration wall time; when false the `ns` column is zero and traces
    /// are reproducible byte for byte.
    pub record_timing: bool,
}

impl SolverConfig {
    pub const DEFAULT_MAX_ITERS: usize = 300;
    pub const DEFAULT_BATCHED_MAX_ITERS: usize = 500;
    pub const DEFAULT_REL_TOL: f64 = 1e-5;

    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_iters: Self::DEFAULT_MAX_ITERS,
            rel_tol: Self::DEFAULT_REL_TOL,
            momentum: MomentumRule::ExactArgmin,
            batch_fraction: 1.0,
            rng_seed: 0,
            record_timing: true,
        }
    }

    /// Defaults for the mini-batch solver (500 iterations).
    pub fn batched(k: usize, batch_fraction: f64) -> Self {
        Self { max_iters: Self::DEFAULT_BATCHED_MAX_ITERS, batch_fraction, ..Self::new(k) }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_momentum(mut self, momentum: MomentumRule) -> Self {
        self.momentum = momentum;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_timing(mut self, record_timing: bool) -> Self {
        self.record_timing = record_timing;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 1 || self.k > n {
            return Err(Error::InvalidArgument(format!("k = {} must satisfy 1 <= k <= n = {n}", self.k)));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("rel_tol = {} must be positive", self.rel_tol)));
        }
        if !(self.batch_fraction > 0.0 && self.batch_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "batch_fraction = {} must lie in (0, 1]",
                self.batch_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    Stalled,
}

/// One row of a [`SolverTrace`]: objective `f(w_t)`, step size, momentum, support of
/// `w_t` and wall time of the iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub f: f64,
    pub mu: f64,
    pub tau: f64,
    pub support: Vec<usize>,
    pub ns: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
}

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().map(|r| r.f)
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f).collect()
    }

    /// Writes the trace as CSV with columns `iter,f,mu,tau,support,ns`; the support
    /// cell holds space-separated indices.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["iter", "f", "mu", "tau", "support", "ns"])?;
        for r in &self.records {
            let support = r.support.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
            out.write_record([
                r.iter.to_string(),
                format!("{:e}", r.f),
                format!("{:e}", r.mu),
                format!("{:e}", r.tau),
                support,
                r.ns.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// State of one accelerated iteration, handed to observers.
pub struct IterationView<'a, T: Scalar> {
    /// 1-based iteration number (the record index).
    pub iter: usize,
    /// Momentum iterate `z_t` the gradient was taken at.
    pub z: ArrayView1<'a, T>,
    /// Gradient (or its stochastic estimate) at `z_t`.
    pub gradient: ArrayView1<'a, T>,
    /// Expanded support `S` (at most `3k` indices).
    pub expanded_support: &'a [usize],
    /// Gradient restricted to `S`, the line-search direction.
    pub restricted_gradient: ArrayView1<'a, T>,
    pub mu: T,
    /// Previous iterate `w_t`.
    pub w_prev: &'a WeightVector<T>,
    /// New iterate `w_{t+1}`.
    pub w_next: &'a WeightVector<T>,
    /// Momentum coefficient `tau_{t+1}`.
    pub tau: T,
    /// De-bias data for A-IHT II: `(x_t, restricted gradient at x_t, step)`.
    pub debias: Option<(&'a WeightVector<T>, ArrayView1<'a, T>, T)>,
}

/// `||d||^2 / (2 ||Phi d||^2)`, the exact minimiser of `f(z - mu d)` when `d` is a
/// restricted gradient at `z`. Zero when `Phi d = 0`.
pub fn line_search_step<T: Scalar>(p: &SparseRegressionProblem<T>, direction: ArrayView1<T>) -> Result<T> {
    if direction.len() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: direction.len() });
    }
    Ok(step_from(norm_sq(direction), norm_sq(p.apply(direction).view())))
}

fn step_from<T: Scalar>(d_sq: T, phi_d_sq: T) -> T {
    if phi_d_sq > T::zero() {
        d_sq / (T::lit(2.0) * phi_d_sq)
    } else {
        T::zero()
    }
}

/// Momentum coefficient along `d = w_next - w_prev`. Zero when `Phi d = 0`.
pub fn momentum_coefficient<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    w_next: &WeightVector<T>,
    w_prev: &WeightVector<T>,
    rule: MomentumRule,
) -> Result<T> {
    for len in [w_next.len(), w_prev.len()] {
        if len != p.n() {
            return Err(Error::DimensionMismatch { expected: p.n(), found: len });
        }
    }
    let residual = &p.y() - &p.apply_on(w_next.values(), w_next.support());
    let support = union_sorted(w_next.support(), w_prev.support());
    let d = &w_next.values() - &w_prev.values();
    let phi_d = p.apply_on(d.view(), &support);
    Ok(tau_from(residual.dot(&phi_d), norm_sq(phi_d.view()), rule))
}

fn tau_from<T: Scalar>(inner: T, phi_d_sq: T, rule: MomentumRule) -> T {
    if phi_d_sq > T::zero() {
        match rule {
            MomentumRule::ExactArgmin => inner / phi_d_sq,
            MomentumRule::HalfArgmin => inner / (T::lit(2.0) * phi_d_sq),
        }
    } else {
        T::zero()
    }
}

/// Batch size `round(batch_fraction * n)`.
pub fn batch_size(n: usize, batch_fraction: f64) -> Result<usize> {
    if !(batch_fraction > 0.0 && batch_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("batch_fraction = {batch_fraction} must lie in (0, 1]")));
    }
    let b = (batch_fraction * n as f64).round() as usize;
    if b == 0 {
        return Err(Error::InvalidArgument(format!(
            "batch_fraction = {batch_fraction} gives an empty batch for n = {n}"
        )));
    }
    Ok(b.min(n))
}

/// Unbiased gradient estimate `2 G1^T Phi^T (Phi G2 x - y)`, where `G1`, `G2` keep
/// independent uniform column subsets of size `B` scaled by `n / B`. With
/// `batch_fraction = 1` this is the exact gradient.
pub fn stochastic_gradient<T: Scalar, R: Rng + ?Sized>(
    p: &SparseRegressionProblem<T>,
    x: ArrayView1<T>,
    batch_fraction: f64,
    rng: &mut R,
) -> Result<Array1<T>> {
    let n = p.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let b = batch_size(n, batch_fraction)?;
    if b == n {
        return Ok(p.gradient_at(x));
    }
    let scale = T::from_usize(n).unwrap() / T::from_usize(b).unwrap();
    let mut first = index::sample(rng, n, b).into_vec();
    let mut second = index::sample(rng, n, b).into_vec();
    first.sort_unstable();
    second.sort_unstable();

    let mut masked = Array1::<T>::zeros(n);
    for &i in &second {
        masked[i] = scale * x[i];
    }
    let r = &p.apply_on(masked.view(), &second) - &p.y();
    let mut g = Array1::<T>::zeros(n);
    let two_scale = T::lit(2.0) * scale;
    for &i in &first {
        g[i] = two_scale * p.column(i).dot(&r);
    }
    Ok(g)
}

fn all_finite<T: Scalar>(v: ArrayView1<T>) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn elapsed_ns(start: Option<Instant>) -> u64 {
    start.map(|s| s.elapsed().as_nanos() as u64).unwrap_or(0)
}

fn converged<T: Scalar>(w_next: &WeightVector<T>, w_prev: &WeightVector<T>, rel_tol: f64) -> bool {
    let diff = norm_sq((&w_next.values() - &w_prev.values()).view()).sqrt();
    let norm = norm_sq(w_next.values()).sqrt();
    diff <= T::lit(rel_tol) * norm
}

/// Vanilla IHT: `w <- Pi_{C_k ∩ R+}(w - step * grad f(w))` from `w = 0`.
pub fn solve_vanilla_iht<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    cfg: &SolverConfig,
    step: T,
) -> Result<(WeightVector<T>, SolverTrace)> {
    cfg.validate(p.n())?;
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("step = {step} must be positive")));
    }
    let mut w = WeightVector::zeros(p.n());
    let mut records = Vec::new();
    for t in 1..=cfg.max_iters {
        let start = cfg.record_timing.then(Instant::now);
        let grad = p.gradient_at(w.values());
        if !all_finite(grad.view()) {
            return Err(divergence(t, &records));
        }
        let w_next = project_topk_nonneg((&w.values() - &(&grad * step)).view(), cfg.k)?;
        let r = &p.y() - &p.apply_on(w_next.values(), w_next.support());
        let f = r.dot(&r);
        if !f.is_finite() || !all_finite(w_next.values()) {
            return Err(divergence(t, &records));
        }
        let done = converged(&w_next, &w, cfg.rel_tol);
        records.push(IterationRecord {
            iter: t,
            f: f.as_f64(),
            mu: step.as_f64(),
            tau: 0.0,
            support: w_next.support().to_vec(),
            ns: elapsed_ns(start),
        });
        w = w_next;
        if done {
            return Ok((w, SolverTrace { records, termination: Termination::Converged }));
        }
    }
    Ok((w, SolverTrace { records, termination: Termination::MaxIters }))
}

/// Step halvings tried before a stochastic step is rejected.
const MAX_HALVINGS: usize = 60;

fn objective_on<T: Scalar>(p: &SparseRegressionProblem<T>, x: ArrayView1<T>, support: &[usize]) -> T {
    let r = &p.y() - &p.apply_on(x, support);
    r.dot(&r)
}

fn divergence(iteration: usize, records: &[IterationRecord]) -> Error {
    Error::Divergence { iteration, objective_history: records.iter().map(|r| r.f).collect() }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Variant {
    Accelerated,
    Debiased,
}

/// Automated accelerated IHT (A-IHT).
pub fn solve_aiht<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    cfg: &SolverConfig,
) -> Result<(WeightVector<T>, SolverTrace)> {
    accelerated(p, cfg, Variant::Accelerated, false, |_| {})
}

/// A-IHT with the de-bias step (A-IHT II).
pub fn solve_aiht2<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    cfg: &SolverConfig,
) -> Result<(WeightVector<T>, SolverTrace)> {
    accelerated(p, cfg, Variant::Debiased, false, |_| {})
}

/// A-IHT driven by [`stochastic_gradient`] with `cfg.batch_fraction`.
///
/// When the batch is a strict subset, each projected step is halved (up to 60 times)
/// until the true objective at the new point does not exceed its value at the momentum
/// iterate; a step that never qualifies is rejected and the iterate is kept. Such runs
/// ignore `rel_tol` and stop after `max_iters` iterations. With `batch_fraction = 1`
/// the trace equals that of [`solve_aiht`].
pub fn solve_aiht_batched<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    cfg: &SolverConfig,
) -> Result<(WeightVector<T>, SolverTrace)> {
    accelerated(p, cfg, Variant::Accelerated, true, |_| {})
}

/// [`solve_aiht`] calling `observer` after every iteration.
pub fn solve_aiht_observed<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    cfg: &SolverConfig,
    observer: impl FnMut(&IterationView<'_, T>),
) -> Result<(WeightVector<T>, SolverTrace)> {
    accelerated(p, cfg, Variant::Accelerated, false, observer)
}

/// [`solve_aiht2`] calling `observer` after every iteration.
pub fn solve_aiht2_observed<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    cfg: &SolverConfig,
    observer: impl FnMut(&IterationView<'_, T>),
) -> Result<(WeightVector<T>, SolverTrace)> {
    accelerated(p, cfg, Variant::Debiased, false, observer)
}

fn accelerated<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    cfg: &SolverConfig,
    variant: Variant,
    batched: bool,
    mut observer: impl FnMut(&IterationView<'_, T>),
) -> Result<(WeightVector<T>, SolverTrace)> {
    let n = p.n();
    cfg.validate(n)?;
    // a subsampled gradient needs the backtracking safeguard; a full batch does not
    let stochastic = batched && batch_size(n, cfg.batch_fraction)? < n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let mut w = WeightVector::<T>::zeros(n);
    let mut z = Array1::<T>::zeros(n);
    let mut z_support: Vec<usize> = Vec::new();
    let mut records = Vec::new();
    let mut stalls = 0usize;

    for t in 1..=cfg.max_iters {
        let start = cfg.record_timing.then(Instant::now);

        let grad = if batched {
            stochastic_gradient(p, z.view(), cfg.batch_fraction, &mut rng)?
        } else {
            p.gradient_at(z.view())
        };
        if !all_finite(grad.view()) {
            return Err(divergence(t, &records));
        }

        // active subspace expansion
        let fresh = project_topk_excluding(grad.view(), cfg.k, &z_support)?;
        let expanded = union_sorted(&fresh, &z_support);
        let restricted = restrict(grad.view(), &expanded)?;
        let phi_r = p.apply_on(restricted.view(), &expanded);
        let phi_r_sq = norm_sq(phi_r.view());
        let mu = step_from(norm_sq(restricted.view()), phi_r_sq);
        if phi_r_sq > T::zero() {
            stalls = 0;
        } else {
            stalls += 1;
        }

        // projected step along the full gradient
        let mut x = project_topk_nonneg((&z - &(&grad * mu)).view(), cfg.k)?;
        let mut mu = mu;
        if stochastic {
            // the step is exact only for the true gradient; an estimate can overshoot,
            // so halve it until the true objective does not increase
            let f_z = objective_on(p, z.view(), &z_support);
            let mut f_x = objective_on(p, x.values(), x.support());
            let mut halvings = 0;
            while !(f_x <= f_z) && halvings < MAX_HALVINGS {
                mu *= T::lit(0.5);
                x = project_topk_nonneg((&z - &(&grad * mu)).view(), cfg.k)?;
                f_x = objective_on(p, x.values(), x.support());
                halvings += 1;
            }
            if !(f_x <= f_z) {
                x = w.clone();
                mu = T::zero();
            }
        }

        let mut debias_data = None;
        let w_next = match variant {
            Variant::Accelerated => x.clone(),
            Variant::Debiased => {
                let gx = p.gradient_at(x.values());
                if !all_finite(gx.view()) {
                    return Err(divergence(t, &records));
                }
                let g2 = restrict(gx.view(), x.support())?;
                let g2_sq = norm_sq(g2.view());
                let phi_g2_sq = norm_sq(p.apply_on(g2.view(), x.support()).view());
                if g2_sq > T::zero() && phi_g2_sq > T::zero() {
                    let mu2 = step_from(g2_sq, phi_g2_sq);
                    let w_next = project_nonneg((&x.values() - &(&g2 * mu2)).view());
                    debias_data = Some((g2, mu2));
                    w_next
                } else {
                    // degenerate restricted gradient: skip the de-bias step
                    x.clone()
                }
            }
        };

        // momentum
        let residual = &p.y() - &p.apply_on(w_next.values(), w_next.support());
        let f = residual.dot(&residual);
        if !f.is_finite() {
            return Err(divergence(t, &records));
        }
        let pair_support = union_sorted(w_next.support(), w.support());
        let d = &w_next.values() - &w.values();
        let phi_d = p.apply_on(d.view(), &pair_support);
        let tau = tau_from(residual.dot(&phi_d), norm_sq(phi_d.view()), cfg.momentum);
        let z_next = &w_next.values() + &(&d * tau);

        // a subsampled gradient can leave the iterate in place far from a fixed point,
        // so the relative-change rule only applies to exact gradients
        let done = !stochastic && converged(&w_next, &w, cfg.rel_tol);
        let ns = elapsed_ns(start);

        observer(&IterationView {
            iter: t,
            z: z.view(),
            gradient: grad.view(),
            expanded_support: &expanded,
            restricted_gradient: restricted.view(),
            mu,
            w_prev: &w,
            w_next: &w_next,
            tau,
            debias: debias_data.as_ref().map(|(g2, mu2)| (&x, g2.view(), *mu2)),
        });

        records.push(IterationRecord {
            iter: t,
            f: f.as_f64(),
            mu: mu.as_f64(),
            tau: tau.as_f64(),
            support: w_next.support().to_vec(),
            ns,
        });

        z_support = pair_support.into_iter().filter(|&i| z_next[i] != T::zero()).collect();
        z = z_next;
        w = w_next;

        if done {
            return Ok((w, SolverTrace { records, termination: Termination::Converged }));
        }
        if stalls >= 2 {
            return Ok((w, SolverTrace { records, termination: Termination::Stalled }));
        }
    }
    Ok((w, SolverTrace { records, termination: Termination::MaxIters }))
}

/// Which solver to run, for callers that dispatch on configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Vanilla,
    Aiht,
    Aiht2,
    AihtBatched,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Vanilla => "vanilla",
            SolverKind::Aiht => "aiht",
            SolverKind::Aiht2 => "aiht2",
            SolverKind::AihtBatched => "aiht_batched",
        }
    }

    /// Runs the solver. Vanilla IHT uses `1 / (2 ||Phi||_2^2)` as its step.
    pub fn solve<T: Scalar>(
        self,
        p: &SparseRegressionProblem<T>,
        cfg: &SolverConfig,
    ) -> Result<(WeightVector<T>, SolverTrace)> {
        match self {
            SolverKind::Vanilla => solve_vanilla_iht(p, cfg, spectral_step(p)),
            SolverKind::Aiht => solve_aiht(p, cfg),
            SolverKind::Aiht2 => solve_aiht2(p, cfg),
            SolverKind::AihtBatched => solve_aiht_batched(p, cfg),
        }
    }
}

/// `1 / (2 lambda_max(Phi^T Phi))`, with the top eigenvalue from 200 power iterations
/// started at the all-ones vector.
pub fn spectral_step<T: Scalar>(p: &SparseRegressionProblem<T>) -> T {
    let mut v = Array1::<T>::ones(p.n());
    let mut lambda = T::zero();
    for _ in 0..200 {
        let u = p.apply_transpose(p.apply(v.view()).view());
        let norm = norm_sq(u.view()).sqrt();
        if norm == T::zero() {
            break;
        }
        lambda = norm / norm_sq(v.view()).sqrt();
        v = u / norm;
    }
    if lambda > T::zero() {
        T::one() / (T::lit(2.0) * lambda)
    } else {
        T::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn identity_problem() -> SparseRegressionProblem<f64> {
        SparseRegressionProblem::new(Array2::eye(3), array![1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn line_search_identity_is_half() {
        let p = identity_problem();
        let mu = line_search_step(&p, array![0.3, 0.0, -2.0].view()).unwrap();
        assert_eq!(mu, 0.5);
        assert_eq!(line_search_step(&p, array![0.0, 0.0, 0.0].view()).unwrap(), 0.0);
    }

    #[test]
    fn momentum_zero_for_identical_iterates() {
        let p = identity_problem();
        let w = WeightVector::new(array![1.0, 0.0, 2.0]).unwrap();
        assert_eq!(momentum_coefficient(&p, &w, &w, MomentumRule::ExactArgmin).unwrap(), 0.0);
    }

    #[test]
    fn half_argmin_momentum_is_half_of_exact() {
        let p = identity_problem();
        let a = WeightVector::new(array![1.0, 0.0, 2.0]).unwrap();
        let b = WeightVector::new(array![0.5, 0.5, 0.0]).unwrap();
        let exact = momentum_coefficient(&p, &a, &b, MomentumRule::ExactArgmin).unwrap();
        let literal = momentum_coefficient(&p, &a, &b, MomentumRule::HalfArgmin).unwrap();
        assert!(exact != 0.0);
        assert_eq!(literal, exact / 2.0);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0).validate(3).is_err());
        assert!(SolverConfig::new(4).validate(3).is_err());
        assert!(SolverConfig::new(2).with_rel_tol(0.0).validate(3).is_err());
        assert!(SolverConfig::batched(2, 0.0).validate(3).is_err());
        assert!(SolverConfig::batched(2, 1.5).validate(3).is_err());
        assert_eq!(SolverConfig::batched(2, 0.2).max_iters, 500);
        assert!(SolverConfig::new(2).validate(3).is_ok());
    }

    #[test]
    fn batch_size_rounds() {
        assert_eq!(batch_size(5, 0.2).unwrap(), 1);
        assert_eq!(batch_size(10, 0.25).unwrap(), 3);
        assert!(batch_size(2, 0.2).is_err());
    }

    #[test]
    fn zero_target_returns_origin_after_one_iteration() {
        let p = SparseRegressionProblem::new(array![[1.0, 2.0], [0.5, -1.0]], array![0.0, 0.0]).unwrap();
        let cfg = SolverConfig::new(1);
        for (w, trace) in [
            solve_aiht(&p, &cfg).unwrap(),
            solve_aiht2(&p, &cfg).unwrap(),
            solve_vanilla_iht(&p, &cfg, 0.1).unwrap(),
        ] {
            assert_eq!(w.nnz(), 0);
            assert_eq!(trace.iterations(), 1);
            assert_eq!(trace.termination, Termination::Converged);
        }
    }

    #[test]
    fn vanilla_rejects_bad_step() {
        let p = identity_problem();
        assert!(solve_vanilla_iht(&p, &SolverConfig::new(1), 0.0).is_err());
    }

    #[test]
    fn trace_csv_header_and_rows() {
        let p = identity_problem();
        let (_, trace) = solve_aiht(&p, &SolverConfig::new(2).with_timing(false)).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iter,f,mu,tau,support,ns"));
        assert_eq!(lines.count(), trace.iterations());
    }

    #[test]
    fn spectral_step_of_scaled_identity() {
        let p = SparseRegressionProblem::new(Array2::eye(3) * 2.0, array![1.0, 1.0, 1.0]).unwrap();
        assert!(f64::abs(spectral_step(&p) - 1.0 / 8.0) < 1e-12);
    }
}
