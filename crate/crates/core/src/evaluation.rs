//! Coreset quality metrics, restricted isometry constants and the convergence
//! invariant checker.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, solve_lower, symmetric_eigenvalues, SpdMatrix};
use crate::models::{map_estimate, posterior, BayesianModel, GaussianDist};
use crate::problem::{SparseRegressionProblem, WeightVector};
use crate::scalar::Scalar;
use crate::solvers::{solve_aiht_observed, SolverConfig, SolverTrace};

/// Default cap on the number of supports enumerated per sparsity level.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1_000_000;

/// `KL(p || q)` between two Gaussians, clamped at zero against rounding.
pub fn gaussian_kl<T: Scalar>(p: &GaussianDist<T>, q: &GaussianDist<T>) -> Result<T> {
    let d = p.dim();
    if q.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: q.dim() });
    }
    let lq = q.cov_spd().cholesky_factor();
    let lp = p.cov_spd().cholesky_factor();
    // tr(Sq^{-1} Sp) = ||Lq^{-1} Lp||_F^2
    let mut trace = T::zero();
    for j in 0..d {
        let col = solve_lower(lq.view(), lp.column(j));
        trace += col.dot(&col);
    }
    let delta = q.mean() - p.mean();
    let quad = q.cov_spd().inv_quad_form(delta.view());
    let dim = T::from_usize(d).unwrap();
    let kl = T::lit(0.5) * (trace + quad - dim + q.log_det_cov() - p.log_det_cov());
    Ok(kl.max(T::zero()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlDirection {
    /// `KL(full || coreset)`.
    Forward,
    /// `KL(coreset || full)`.
    Reverse,
    /// Forward plus reverse.
    Symmetrized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlValues {
    pub forward: f64,
    pub reverse: f64,
    pub symmetrized: f64,
}

impl KlValues {
    pub fn get(&self, direction: KlDirection) -> f64 {
        match direction {
            KlDirection::Forward => self.forward,
            KlDirection::Reverse => self.reverse,
            KlDirection::Symmetrized => self.symmetrized,
        }
    }
}

/// All three divergences between a full-data and a coreset posterior.
pub fn kl_values<T: Scalar>(full: &GaussianDist<T>, coreset: &GaussianDist<T>) -> Result<KlValues> {
    let forward = gaussian_kl(full, coreset)?.as_f64();
    let reverse = gaussian_kl(coreset, full)?.as_f64();
    Ok(KlValues { forward, reverse, symmetrized: forward + reverse })
}

/// Divergence between the full-data posterior and the `w`-weighted posterior (closed
/// form for conjugate models, Laplace approximations otherwise).
pub fn coreset_kl<T: Scalar>(m: &BayesianModel<T>, w: &WeightVector<T>, direction: KlDirection) -> Result<T> {
    let full = posterior(m, &WeightVector::ones(m.n()))?;
    let coreset = posterior(m, w)?;
    Ok(T::lit(kl_values(&full, &coreset)?.get(direction)))
}

/// `||theta_MAP(all ones) - theta_MAP(w)||_2`.
pub fn map_l2_distance<T: Scalar>(m: &BayesianModel<T>, w: &WeightVector<T>) -> Result<T> {
    let full = map_estimate(m, &WeightVector::ones(m.n()))?;
    let coreset = map_estimate(m, w)?;
    Ok(norm((&full - &coreset).view()))
}

/// `C(n, k)` without overflow for the sizes that matter here (saturates).
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Calls `visit` on every size-`k` subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { return };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipLevel {
    pub s: usize,
    pub alpha: f64,
    pub beta: f64,
}

/// Exhaustively computed restricted isometry constants: for each level `s`,
/// `alpha_s ||w||^2 <= ||Phi w||^2 <= beta_s ||w||^2` for every `s`-sparse `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipConstants {
    /// Number of columns of the matrix the constants describe.
    pub n: usize,
    pub levels: Vec<RipLevel>,
}

impl RipConstants {
    /// Constants at level `s`; levels above `n` coincide with level `n`.
    pub fn level(&self, s: usize) -> Option<RipLevel> {
        let s = s.min(self.n);
        self.levels.iter().find(|l| l.s == s).copied()
    }

    pub fn alpha(&self, s: usize) -> Option<f64> {
        self.level(s).map(|l| l.alpha)
    }

    pub fn beta(&self, s: usize) -> Option<f64> {
        self.level(s).map(|l| l.beta)
    }
}

pub fn estimate_rip<T: Scalar>(p: &SparseRegressionProblem<T>, levels: &[usize]) -> Result<RipConstants> {
    estimate_rip_with_budget(p, levels, DEFAULT_ENUMERATION_BUDGET)
}

/// Enumerates every support of each requested size (clamped to `n`) and records the
/// extreme eigenvalues of `Phi_T^T Phi_T`. Refuses when a level needs more than
/// `budget` supports.
pub fn estimate_rip_with_budget<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    levels: &[usize],
    budget: u128,
) -> Result<RipConstants> {
    let n = p.n();
    let mut sizes: Vec<usize> = levels.iter().map(|&s| s.min(n)).collect();
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument("sparsity levels must be at least 1".into()));
    }
    sizes.sort_unstable();
    sizes.dedup();
    for &s in &sizes {
        let required = binomial(n, s);
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
    }
    let phi = p.phi();
    let gram: Array2<f64> = phi.t().dot(&phi).mapv(|v| v.as_f64());
    let mut out = Vec::with_capacity(sizes.len());
    for s in sizes {
        let mut alpha = f64::INFINITY;
        let mut beta = 0.0f64;
        let mut sub = Array2::<f64>::zeros((s, s));
        for_each_combination(n, s, |support| {
            for (a, &i) in support.iter().enumerate() {
                for (b, &j) in support.iter().enumerate() {
                    sub[[a, b]] = gram[[i, j]];
                }
            }
            let eig = symmetric_eigenvalues(sub.view());
            alpha = alpha.min(eig[0]);
            beta = beta.max(eig[s - 1]);
        });
        out.push(RipLevel { s, alpha: alpha.max(0.0), beta });
    }
    Ok(RipConstants { n, levels: out })
}

/// Exact non-negative least squares on the columns in `support`, by enumerating the
/// subsets of the support that may be strictly positive. Returns the weights over
/// `support` and the objective. Intended for supports of a handful of columns.
fn nnls_on_support(gram: &Array2<f64>, phi_t_y: &Array1<f64>, y_sq: f64, support: &[usize]) -> (Vec<f64>, f64) {
    let s = support.len();
    let mut best = (vec![0.0; s], y_sq);
    for mask in 1u64..(1u64 << s) {
        let active: Vec<usize> = (0..s).filter(|a| mask >> a & 1 == 1).collect();
        let m = active.len();
        let mut g = Array2::<f64>::zeros((m, m));
        let mut b = Array1::<f64>::zeros(m);
        for (a, &ia) in active.iter().enumerate() {
            b[a] = phi_t_y[support[ia]];
            for (c, &ic) in active.iter().enumerate() {
                g[[a, c]] = gram[[support[ia], support[ic]]];
            }
        }
        let Ok(spd) = SpdMatrix::new(g) else { continue };
        let x = spd.solve(b.view());
        if x.iter().any(|v| *v <= 0.0) {
            continue;
        }
        // f = ||y||^2 - 2 x^T b + x^T G x = ||y||^2 - x^T b at the stationary point
        let f = (y_sq - x.dot(&b)).max(0.0);
        if f < best.1 {
            let mut full = vec![0.0; s];
            for (a, &ia) in active.iter().enumerate() {
                full[ia] = x[a];
            }
            best = (full, f);
        }
    }
    best
}

/// Global minimiser of `||y - Phi w||^2` over `k`-sparse non-negative `w`, by
/// enumerating all `C(n, k)` supports. Ties go to the lexicographically first
/// support.
pub fn brute_force_optimum<T: Scalar>(p: &SparseRegressionProblem<T>, k: usize, budget: u128) -> Result<WeightVector<T>> {
    let n = p.n();
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!("sparsity k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    if k > 20 {
        return Err(Error::InvalidArgument(format!("exhaustive optimum supports k <= 20, got {k}")));
    }
    let required = binomial(n, k);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let phi = p.phi().mapv(|v| v.as_f64());
    let y = p.y().mapv(|v| v.as_f64());
    let gram = phi.t().dot(&phi);
    let phi_t_y = phi.t().dot(&y);
    let y_sq = y.dot(&y);
    let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    for_each_combination(n, k, |support| {
        let (x, f) = nnls_on_support(&gram, &phi_t_y, y_sq, support);
        if best.as_ref().is_none_or(|b| f < b.2) {
            best = Some((support.to_vec(), x, f));
        }
    });
    let (support, x, _) = best.expect("at least one support");
    let mut w = Array1::<T>::zeros(n);
    for (i, v) in support.into_iter().zip(x) {
        w[i] = T::lit(v);
    }
    WeightVector::new(w)
}

/// Constants of the iterate-distance bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1 {
    pub rho: f64,
    /// `2 beta_3k sqrt(beta_2k)`, the multiplier of `||eps||`.
    pub noise_gain: f64,
}

impl Theorem1 {
    /// `rho = 2 max(beta_2k / alpha_3k - 1, 1 - alpha_2k / beta_3k) + (beta_4k - alpha_4k) / alpha_3k`.
    pub fn from_rip(rip: &RipConstants, k: usize) -> Result<Self> {
        let get = |s: usize| {
            rip.level(s).ok_or_else(|| Error::InvalidArgument(format!("RIP constants missing level {}", s.min(rip.n))))
        };
        let (l2, l3, l4) = (get(2 * k)?, get(3 * k)?, get(4 * k)?);
        get(k)?;
        Ok(Self::from_constants(l2.alpha, l2.beta, l3.alpha, l3.beta, l4.alpha, l4.beta))
    }

    pub fn from_constants(a2: f64, b2: f64, a3: f64, b3: f64, a4: f64, b4: f64) -> Self {
        let rho = 2.0 * (b2 / a3 - 1.0).max(1.0 - a2 / b3) + (b4 - a4) / a3;
        Self { rho, noise_gain: 2.0 * b3 * b2.sqrt() }
    }

    /// Linear rate `phi = (rho (1 + tau) + sqrt(rho^2 (1 + tau)^2 + 4 rho tau)) / 2`.
    pub fn phi(&self, tau_bar: f64) -> f64 {
        let a = self.rho * (1.0 + tau_bar);
        (a + (a * a + 4.0 * self.rho * tau_bar).sqrt()) / 2.0
    }

    /// Sufficient condition for linear convergence, `rho < 1 / (1 + 2 tau)`.
    pub fn linear_convergence(&self, tau_bar: f64) -> bool {
        self.rho < 1.0 / (1.0 + 2.0 * tau_bar)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantRow {
    pub iter: usize,
    /// `||w_{t+1} - w*||`.
    pub lhs: f64,
    pub rhs: f64,
    /// Momentum coefficient that formed the extrapolated point of this iteration.
    pub tau: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub k: usize,
    pub rho: f64,
    pub phi: f64,
    pub tau_bar: f64,
    pub eps_norm: f64,
    /// Whether `rho < 1 / (1 + 2 tau_bar)`.
    pub linear_condition: bool,
    pub all_satisfied: bool,
    pub rows: Vec<InvariantRow>,
    pub objectives: Vec<f64>,
    /// Least-squares slope of `ln f` over the converging tail, if long enough.
    pub tail_slope: Option<f64>,
    pub rip: RipConstants,
}

/// Runs A-IHT and evaluates the iterate-distance bound against `w_star` at every
/// iteration, along with the linear-rate constants derived from it.
pub fn theorem1_check<T: Scalar>(
    p: &SparseRegressionProblem<T>,
    cfg: &SolverConfig,
    w_star: &WeightVector<T>,
    rip: &RipConstants,
) -> Result<(InvariantReport, SolverTrace)> {
    if w_star.len() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: w_star.len() });
    }
    let thm = Theorem1::from_rip(rip, cfg.k)?;
    let star: Array1<f64> = w_star.values().mapv(|v| v.as_f64());
    let eps_norm = norm(p.residual(w_star.values()).view()).as_f64();
    // slack for rounding in the distances themselves
    let slack = 64.0 * T::epsilon().as_f64() * (star.dot(&star).sqrt() + 1.0);

    let dist = |w: &WeightVector<T>| {
        let d = &w.values().mapv(|v| v.as_f64()) - &star;
        d.dot(&d).sqrt()
    };
    let mut rows = Vec::new();
    let mut prev_dist = dist(&WeightVector::zeros(p.n()));
    let mut prev_tau = 0.0f64;
    let (_, trace) = solve_aiht_observed(p, cfg, |view| {
        let cur = dist(view.w_prev);
        let lhs = dist(view.w_next);
        let tau = prev_tau;
        let rhs = thm.rho * (1.0 + tau).abs() * cur + thm.rho * tau.abs() * prev_dist + thm.noise_gain * eps_norm;
        rows.push(InvariantRow { iter: view.iter, lhs, rhs, tau, satisfied: lhs <= rhs + slack });
        prev_dist = cur;
        prev_tau = view.tau.as_f64();
    })?;
    let tau_bar = rows.iter().map(|r| r.tau.abs()).fold(0.0, f64::max);
    let objectives = trace.objectives();
    let report = InvariantReport {
        k: cfg.k,
        rho: thm.rho,
        phi: thm.phi(tau_bar),
        tau_bar,
        eps_norm,
        linear_condition: thm.linear_convergence(tau_bar),
        all_satisfied: rows.iter().all(|r| r.satisfied),
        tail_slope: tail_slope(&objectives),
        rows,
        objectives,
        rip: rip.clone(),
    };
    Ok((report, trace))
}

/// Slope of a least-squares line through `ln f_t` over the converging tail: the second
/// half of the iterations whose objective is still above `1e-24` times the first
/// one (below that the sequence sits at the rounding floor). `None` with fewer than
/// three usable points.
pub fn tail_slope(objectives: &[f64]) -> Option<f64> {
    let first = *objectives.first()?;
    if !(first > 0.0) {
        return None;
    }
    let floor = first * 1e-24;
    let usable = objectives.iter().take_while(|f| **f > floor).count();
    let start = usable / 2;
    let pts: Vec<(f64, f64)> = (start..usable).map(|t| (t as f64, objectives[t].ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}
