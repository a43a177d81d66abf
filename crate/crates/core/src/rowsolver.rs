//! Cyclic coordinatewise minimization of the row objective
//!
//! ```text
//! h(x) = −2 log x_k + xᵀAx + λ Σ_{j<k} |x_j|,   x ∈ R^{k−1} × R_+
//! ```
//!
//! Every coordinate has a closed-form minimizer: a soft-thresholded
//! quadratic vertex for `j < k` and the positive root of a quadratic for the
//! diagonal coordinate. Two computational paths produce the same iterates:
//! the dense path keeps `w = Ax` up to date (`O(k)` per changed coordinate),
//! and the low-rank path keeps `r = Bᵀx` for `A = BBᵀ` (`O(n)` per
//! coordinate), so one sweep costs `min(O(k²), O(nk))`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CscsError, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const LOW_RANK_TOL: f64 = 1e-10;

/// Stopping rule and starting point for [`minimize_row`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop once the max-norm change of a full sweep is below this.
    pub epsilon: f64,
    /// Maximum number of sweeps.
    pub max_iter: usize,
    /// Starting point; defaults to `(0, …, 0, 1/√A_kk)`.
    pub initial: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-8,
            max_iter: 1000,
            initial: None,
        }
    }
}

impl SolverConfig {
    pub fn new(epsilon: f64, max_iter: usize) -> Self {
        Self {
            epsilon,
            max_iter,
            initial: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(CscsError::InvalidConfig(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(CscsError::InvalidConfig("max_iter must be >= 1".into()));
        }
        if let Some(x) = &self.initial {
            if x.last().is_none_or(|v| !(*v > 0.0)) || x.iter().any(|v| !v.is_finite()) {
                return Err(CscsError::InvalidConfig(
                    "initial point must be finite with a positive last coordinate".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComputePath {
    Dense,
    LowRank,
}

/// One instance of `h_{k,A,λ}`.
///
/// `A` is the leading `k x k` block of the borrowed matrix, which lets the
/// estimator hand out principal submatrices of `S` without copying. The
/// optional factor is stored transposed (`n x m`, `m ≥ k`), so that
/// `A = factor_tᵀ·factor_t` on the leading block.
#[derive(Debug, Clone, Copy)]
pub struct RowProblem<'a> {
    k: usize,
    a: &'a DMatrix<f64>,
    factor_t: Option<&'a DMatrix<f64>>,
    lambda: f64,
}

impl<'a> RowProblem<'a> {
    /// Uses the whole of `a` (`k = a.nrows()`).
    pub fn new(a: &'a DMatrix<f64>, lambda: f64) -> Result<Self> {
        Self::leading(a, a.nrows(), lambda)
    }

    /// Uses the leading `k x k` block of `a`.
    pub fn leading(a: &'a DMatrix<f64>, k: usize, lambda: f64) -> Result<Self> {
        if k == 0 || a.nrows() < k || a.ncols() < k {
            return Err(CscsError::InvalidProblem(format!(
                "cannot take a {k}x{k} block of a {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(CscsError::InvalidProblem(format!("lambda {lambda} must be finite and >= 0")));
        }
        let scale = a.view((0, 0), (k, k)).amax();
        for j in 0..k {
            if !(a[(j, j)] > 0.0) {
                return Err(CscsError::InvalidProblem(format!(
                    "diagonal entry {j} is {} (must be > 0)",
                    a[(j, j)]
                )));
            }
            for l in 0..j {
                if !a[(l, j)].is_finite() || (a[(l, j)] - a[(j, l)]).abs() > SYMMETRY_TOL * scale {
                    return Err(CscsError::InvalidProblem(format!("A not symmetric at ({l}, {j})")));
                }
            }
        }
        Ok(Self::unchecked(a, k, lambda, None))
    }

    /// Attaches a transposed low-rank factor after checking `A = BBᵀ`.
    pub fn with_low_rank(mut self, factor_t: &'a DMatrix<f64>) -> Result<Self> {
        let k = self.k;
        if factor_t.ncols() < k {
            return Err(CscsError::InvalidProblem(format!(
                "factor has {} columns, need at least {k}",
                factor_t.ncols()
            )));
        }
        let b = factor_t.columns(0, k);
        let implied = b.tr_mul(&b);
        let diff = (&implied - self.a.view((0, 0), (k, k))).amax();
        if diff > LOW_RANK_TOL {
            return Err(CscsError::InvalidProblem(format!(
                "A differs from BBᵀ by {diff:e}"
            )));
        }
        self.factor_t = Some(factor_t);
        Ok(self)
    }

    pub(crate) fn unchecked(
        a: &'a DMatrix<f64>,
        k: usize,
        lambda: f64,
        factor_t: Option<&'a DMatrix<f64>>,
    ) -> Self {
        Self {
            k,
            a,
            factor_t,
            lambda,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self, l: usize, j: usize) -> f64 {
        self.a[(l, j)]
    }

    /// Rank of the attached factor (its number of rows), if any.
    pub fn factor_rank(&self) -> Option<usize> {
        self.factor_t.map(|f| f.nrows())
    }

    /// Low-rank when a factor is attached and `n < k`, dense otherwise.
    pub fn preferred_path(&self) -> ComputePath {
        match self.factor_t {
            Some(f) if f.nrows() < self.k => ComputePath::LowRank,
            _ => ComputePath::Dense,
        }
    }

    /// `h(x)`; `+∞` when `x_k ≤ 0`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let k = self.k;
        if !(x[k - 1] > 0.0) {
            return f64::INFINITY;
        }
        let quad = crate::covmodel::leading_quadratic(self.a, &x[..k]);
        let l1: f64 = x[..k - 1].iter().map(|v| v.abs()).sum();
        quad - 2.0 * x[k - 1].ln() + self.lambda * l1
    }

    fn default_start(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.k];
        x[self.k - 1] = 1.0 / self.a(self.k - 1, self.k - 1).sqrt();
        x
    }
}

/// Output of [`minimize_row`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSolution {
    pub x: Vec<f64>,
    /// Number of full sweeps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the start point followed by its value after each sweep.
    pub objective_trace: Vec<f64>,
    pub kkt_residual: f64,
    pub path: ComputePath,
}

impl RowSolution {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the start value")
    }
}

/// `sign(x)·max(|x| − λ, 0)`.
pub fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// `Σ_{l≠j} A_lj x_l`, computed densely.
pub fn cross_term(prob: &RowProblem<'_>, x: &[f64], j: usize) -> f64 {
    let col = prob.a.column(j);
    (0..prob.k).filter(|&l| l != j).map(|l| col[l] * x[l]).sum()
}

fn offdiag_minimizer(cross: f64, a_jj: f64, lambda: f64) -> f64 {
    soft_threshold(-2.0 * cross, lambda) / (2.0 * a_jj)
}

/// Positive root of `a·x² + c·x − 1 = 0`, written to avoid cancellation.
fn diag_minimizer(cross: f64, a_kk: f64) -> f64 {
    let disc = (cross * cross + 4.0 * a_kk).sqrt();
    if cross >= 0.0 {
        2.0 / (cross + disc)
    } else {
        (-cross + disc) / (2.0 * a_kk)
    }
}

/// Exact minimizer of `h` over coordinate `j < k`, the others held fixed.
pub fn update_offdiag(prob: &RowProblem<'_>, x: &[f64], j: usize) -> f64 {
    debug_assert!(j + 1 < prob.k);
    offdiag_minimizer(cross_term(prob, x, j), prob.a(j, j), prob.lambda)
}

/// Exact minimizer of `h` over the diagonal coordinate, the others fixed.
pub fn update_diag(prob: &RowProblem<'_>, x: &[f64]) -> f64 {
    let k = prob.k - 1;
    diag_minimizer(cross_term(prob, x, k), prob.a(k, k))
}

/// `Σ_{l≠j} A_lj x_l = B_j·r − A_jj x_j` from the cached `r = Bᵀx`, in `O(n)`.
///
/// `factor_t` is `Bᵀ` (`n x k`), so row `j` of `B` is column `j` here.
pub fn low_rank_gradient_term(factor_t: &DMatrix<f64>, r: &[f64], j: usize, x_j: f64) -> f64 {
    let bj = factor_t.column(j);
    let a_jj = bj.norm_squared();
    debug_assert_eq!(bj.len(), r.len());
    bj.iter().zip(r).map(|(b, r)| b * r).sum::<f64>() - a_jj * x_j
}

/// `r ← r + B_jᵀ·delta` after coordinate `j` moved by `delta`.
pub fn update_residual(factor_t: &DMatrix<f64>, r: &mut [f64], j: usize, delta: f64) {
    for (ri, b) in r.iter_mut().zip(factor_t.column(j).iter()) {
        *ri += b * delta;
    }
}

/// `Bᵀx` computed from scratch.
pub fn residual_from_scratch(factor_t: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let n = factor_t.nrows();
    let mut r = vec![0.0; n];
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            update_residual(factor_t, &mut r, j, xj);
        }
    }
    r
}

/// Incrementally maintained quantities needed by the coordinate updates.
trait CrossTerms {
    fn cross(&self, j: usize, x_j: f64) -> f64;
    fn moved(&mut self, j: usize, delta: f64);
    /// `xᵀAx`.
    fn quadratic(&self, x: &[f64]) -> f64;
    fn check(&self, _x: &[f64]) {}
}

struct DenseTerms<'a> {
    a: &'a DMatrix<f64>,
    k: usize,
    /// `A·x`
    w: Vec<f64>,
}

impl<'a> DenseTerms<'a> {
    fn new(a: &'a DMatrix<f64>, k: usize, x: &[f64]) -> Self {
        let mut w = vec![0.0; k];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (wl, al) in w.iter_mut().zip(a.column(j).iter()) {
                    *wl += al * xj;
                }
            }
        }
        Self { a, k, w }
    }
}

impl CrossTerms for DenseTerms<'_> {
    fn cross(&self, j: usize, x_j: f64) -> f64 {
        self.w[j] - self.a[(j, j)] * x_j
    }

    fn moved(&mut self, j: usize, delta: f64) {
        let col = self.a.column(j);
        for l in 0..self.k {
            self.w[l] += col[l] * delta;
        }
    }

    fn quadratic(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.w).map(|(a, b)| a * b).sum()
    }
}

struct LowRankTerms<'a> {
    factor_t: &'a DMatrix<f64>,
    diag: Vec<f64>,
    /// `Bᵀ·x`
    r: Vec<f64>,
}

impl<'a> LowRankTerms<'a> {
    fn new(prob: &RowProblem<'a>, factor_t: &'a DMatrix<f64>, x: &[f64]) -> Self {
        Self {
            factor_t,
            diag: (0..prob.k).map(|j| prob.a(j, j)).collect(),
            r: residual_from_scratch(factor_t, x),
        }
    }
}

impl CrossTerms for LowRankTerms<'_> {
    fn cross(&self, j: usize, x_j: f64) -> f64 {
        let bj = self.factor_t.column(j);
        bj.iter().zip(&self.r).map(|(b, r)| b * r).sum::<f64>() - self.diag[j] * x_j
    }

    fn moved(&mut self, j: usize, delta: f64) {
        update_residual(self.factor_t, &mut self.r, j, delta);
    }

    fn quadratic(&self, _x: &[f64]) -> f64 {
        self.r.iter().map(|v| v * v).sum()
    }

    fn check(&self, x: &[f64]) {
        if cfg!(debug_assertions) {
            let fresh = residual_from_scratch(self.factor_t, x);
            let scale = 1.0 + fresh.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let stale = fresh
                .iter()
                .zip(&self.r)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            debug_assert!(stale <= 1e-8 * scale, "stale residual: drift {stale:e}");
        }
    }
}

/// Minimizes `h_{k,A,λ}` by cyclic coordinate descent (Gauss–Seidel order:
/// coordinates `1..k−1`, then the diagonal), choosing the path via
/// [`RowProblem::preferred_path`].
///
/// Hitting `max_iter` is not an error; the solution comes back with
/// `converged = false`.
pub fn minimize_row(prob: &RowProblem<'_>, cfg: &SolverConfig) -> Result<RowSolution> {
    minimize_row_with_path(prob, cfg, prob.preferred_path())
}

/// As [`minimize_row`] with an explicit computational path.
pub fn minimize_row_with_path(
    prob: &RowProblem<'_>,
    cfg: &SolverConfig,
    path: ComputePath,
) -> Result<RowSolution> {
    cfg.validate()?;
    let k = prob.k;
    let x0 = match &cfg.initial {
        Some(init) if init.len() != k => {
            return Err(CscsError::InvalidConfig(format!(
                "initial point has length {} (expected {k})",
                init.len()
            )))
        }
        Some(init) => init.clone(),
        None => prob.default_start(),
    };
    match path {
        ComputePath::Dense => {
            let terms = DenseTerms::new(prob.a, k, &x0);
            Ok(run_sweeps(prob, cfg, x0, terms, path))
        }
        ComputePath::LowRank => {
            let factor_t = prob.factor_t.ok_or_else(|| {
                CscsError::InvalidProblem("low-rank path requested without a factor".into())
            })?;
            let terms = LowRankTerms::new(prob, factor_t, &x0);
            Ok(run_sweeps(prob, cfg, x0, terms, path))
        }
    }
}

fn run_sweeps<C: CrossTerms>(
    prob: &RowProblem<'_>,
    cfg: &SolverConfig,
    mut x: Vec<f64>,
    mut terms: C,
    path: ComputePath,
) -> RowSolution {
    let k = prob.k;
    let lambda = prob.lambda;
    let value = |terms: &C, x: &[f64]| {
        let l1: f64 = x[..k - 1].iter().map(|v| v.abs()).sum();
        terms.quadratic(x) - 2.0 * x[k - 1].ln() + lambda * l1
    };

    let mut trace = vec![value(&terms, &x)];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let mut max_change = 0.0f64;
        for j in 0..k - 1 {
            let next = offdiag_minimizer(terms.cross(j, x[j]), prob.a(j, j), lambda);
            let delta = next - x[j];
            if delta != 0.0 {
                terms.moved(j, delta);
                x[j] = next;
                max_change = max_change.max(delta.abs());
            }
        }
        let d = k - 1;
        let next = diag_minimizer(terms.cross(d, x[d]), prob.a(d, d));
        let delta = next - x[d];
        if delta != 0.0 {
            terms.moved(d, delta);
            x[d] = next;
            max_change = max_change.max(delta.abs());
        }
        terms.check(&x);
        trace.push(value(&terms, &x));
        if max_change < cfg.epsilon {
            converged = true;
            break;
        }
    }
    let kkt_residual = kkt_check(prob, &x);
    RowSolution {
        x,
        iterations,
        converged,
        objective_trace: trace,
        kkt_residual,
        path,
    }
}

/// Largest violation of the subgradient optimality conditions of `h` at `x`.
///
/// With `d = 2Ax`: `|d_j + λ·sign(x_j)|` for nonzero `j < k`,
/// `max(|d_j| − λ, 0)` for zero `j < k`, and `|d_k − 2/x_k|` for the
/// diagonal. Zero exactly at global minimizers.
pub fn kkt_check(prob: &RowProblem<'_>, x: &[f64]) -> f64 {
    let k = prob.k;
    let ax: Vec<f64> = match prob.preferred_path() {
        ComputePath::LowRank => {
            let factor_t = prob.factor_t.expect("low-rank path has a factor");
            let r = residual_from_scratch(factor_t, &x[..k]);
            (0..k)
                .map(|j| factor_t.column(j).iter().zip(&r).map(|(b, r)| b * r).sum())
                .collect()
        }
        ComputePath::Dense => DenseTerms::new(prob.a, k, &x[..k]).w,
    };
    let mut worst = 0.0f64;
    for j in 0..k - 1 {
        let d = 2.0 * ax[j];
        let v = if x[j] != 0.0 {
            (d + prob.lambda * x[j].signum()).abs()
        } else {
            (d.abs() - prob.lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst.max((2.0 * ax[k - 1] - 2.0 / x[k - 1]).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - g * (hi - lo);
        let mut d = lo + g * (hi - lo);
        for _ in 0..200 {
            if f(c) < f(d) {
                hi = d;
            } else {
                lo = c;
            }
            c = hi - g * (hi - lo);
            d = lo + g * (hi - lo);
        }
        (lo + hi) / 2.0
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(5.0, 2.0), 3.0);
        assert_eq!(soft_threshold(-1.0, 2.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 0.5), -2.5);
        assert_eq!(soft_threshold(2.0, 2.0), 0.0);
    }

    #[test]
    fn offdiag_update_matches_golden_section() {
        // k = 3, coordinate 0: A_00 = 1, cross term A_10 x_1 + A_20 x_2 = 2
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.5, 1.0, 3.0, 0.0, 0.5, 0.0, 2.0]);
        let prob = RowProblem::new(&a, 1.0).unwrap();
        let x = [0.3, 1.0, 2.0];
        assert_relative_eq!(cross_term(&prob, &x, 0), 2.0);
        let got = update_offdiag(&prob, &x, 0);
        assert_relative_eq!(got, -1.5, epsilon = 1e-15);
        let oracle = golden_section(
            |t| prob.objective(&[t, x[1], x[2]]),
            -10.0,
            10.0,
        );
        assert!((got - oracle).abs() < 1e-7);

        // zero cross term → 0 for any λ
        let a = DMatrix::identity(3, 3);
        let prob = RowProblem::new(&a, 0.7).unwrap();
        assert_eq!(update_offdiag(&prob, &[5.0, 0.0, 1.0], 0), 0.0);

        // λ = 0, A_jj = 2, cross 1 → −b/2a = −0.5
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let prob = RowProblem::new(&a, 0.0).unwrap();
        assert_relative_eq!(update_offdiag(&prob, &[4.0, 1.0], 0), -0.5);
    }

    #[test]
    fn diag_update_examples() {
        let a = DMatrix::identity(1, 1);
        let prob = RowProblem::new(&a, 0.0).unwrap();
        assert_relative_eq!(update_diag(&prob, &[3.0]), 1.0);

        let a = DMatrix::from_element(1, 1, 4.0);
        let prob = RowProblem::new(&a, 0.0).unwrap();
        assert_relative_eq!(update_diag(&prob, &[3.0]), 0.5);

        let a = DMatrix::identity(2, 2) + DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]) * 0.5;
        let prob = RowProblem::new(&a, 0.0).unwrap();
        // cross = 0.5 * 2 = 1
        let x = update_diag(&prob, &[2.0, 1.0]);
        assert_relative_eq!(x, (5f64.sqrt() - 1.0) / 2.0, epsilon = 1e-15);
        assert!((-2.0 / x + 2.0 * x + 2.0).abs() < 1e-12);
    }

    #[test]
    fn diag_root_is_stable_for_large_cross_terms() {
        for c in [-1e8, -1e3, 0.0, 1e3, 1e8] {
            for a in [1e-6, 1.0, 1e6] {
                let x = diag_minimizer(c, a);
                assert!(x > 0.0);
                let resid = (a * x * x + c * x - 1.0) / (a * x * x + c.abs() * x + 1.0);
                assert!(resid.abs() < 1e-12, "c={c} a={a} resid={resid}");
            }
        }
    }

    #[test]
    fn one_dimensional_row_is_closed_form() {
        let a = DMatrix::from_element(1, 1, 9.0);
        let prob = RowProblem::new(&a, 3.0).unwrap();
        let sol = minimize_row(&prob, &SolverConfig::default()).unwrap();
        assert_relative_eq!(sol.x[0], 1.0 / 3.0, epsilon = 1e-15);
        assert!(sol.converged);
        assert_eq!(sol.iterations, 1);
    }

    #[test]
    fn identity_row_is_decoupled() {
        let a = DMatrix::identity(3, 3);
        let prob = RowProblem::new(&a, 0.1).unwrap();
        let sol = minimize_row(&prob, &SolverConfig::default()).unwrap();
        assert_eq!(sol.x, vec![0.0, 0.0, 1.0]);
        assert_eq!(kkt_check(&prob, &sol.x), 0.0);
    }

    #[test]
    fn kkt_detects_perturbation() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]);
        let prob = RowProblem::new(&a, 0.01).unwrap();
        let sol = minimize_row(&prob, &SolverConfig::new(1e-12, 1000)).unwrap();
        assert!(sol.kkt_residual < 1e-9);
        let mut x = sol.x.clone();
        x[0] += 0.1;
        assert!(kkt_check(&prob, &x) > 0.0);
    }

    #[test]
    fn low_rank_term_matches_dense() {
        let bt = DMatrix::from_row_slice(2, 3, &[0.5, -1.0, 0.3, 1.2, 0.1, -0.7]);
        let a = bt.tr_mul(&bt);
        let prob = RowProblem::new(&a, 0.2).unwrap().with_low_rank(&bt).unwrap();
        let x = [0.4, -0.2, 1.1];
        let r = residual_from_scratch(&bt, &x);
        for j in 0..3 {
            let lr = low_rank_gradient_term(&bt, &r, j, x[j]);
            assert!((lr - cross_term(&prob, &x, j)).abs() < 1e-12);
        }
    }

    #[test]
    fn with_low_rank_rejects_wrong_factor() {
        let bt = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let a = DMatrix::identity(2, 2);
        assert!(RowProblem::new(&a, 0.0).unwrap().with_low_rank(&bt).is_err());
    }

    #[test]
    fn invalid_inputs() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(RowProblem::new(&a, 0.1).is_err());
        let a = DMatrix::identity(2, 2);
        assert!(RowProblem::new(&a, -0.1).is_err());
        let prob = RowProblem::new(&a, 0.1).unwrap();
        let cfg = SolverConfig {
            initial: Some(vec![0.0, -1.0]),
            ..Default::default()
        };
        assert!(minimize_row(&prob, &cfg).is_err());
        assert!(minimize_row(&prob, &SolverConfig::new(0.0, 10)).is_err());
        assert!(minimize_row_with_path(&prob, &SolverConfig::default(), ComputePath::LowRank).is_err());
    }
}
