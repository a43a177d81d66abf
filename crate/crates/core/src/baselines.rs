//! Comparison estimators on the modified Cholesky parameters `(T, D)`.
//!
//! * Sparse Cholesky minimizes
//!   `tr(TᵀD⁻¹TS) + log|D| + λ Σ|T_ij|` by alternating, row by row, an
//!   exact lasso step in `φ` (row `i` of `T`) and the closed-form `D_ii`
//!   step. Its infimum is `−∞` once `n < p`, reached only as some `D_ii → 0`,
//!   so `D_ii` is clamped at [`D_FLOOR`] and the run is flagged degenerate.
//! * Sparse DAG fixes `D = I` and solves one lasso per row.
//!
//! Both share the coordinate-descent lasso kernel for
//! `φᵀAφ + 2φᵀs + μ‖φ‖₁`, where `A = S_{i−1}` and `s = S_{·i}`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::covmodel::{from_modified_cholesky, CholeskyFactor, CovarianceMatrix, ModifiedCholesky, PenaltySpec};
use crate::error::{CscsError, Result};
use crate::par::map_indexed;
use crate::rowsolver::{soft_threshold, SolverConfig};

/// Lower clamp for the conditional variances in Sparse Cholesky.
pub const D_FLOOR: f64 = 1e-12;

/// Configuration of the Sparse Cholesky block iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCholConfig {
    /// Outer (block) tolerance and sweep cap.
    pub solver: SolverConfig,
    /// Sweep cap of the inner lasso; its tolerance is `solver.epsilon / 10`.
    pub inner_max_iter: usize,
    pub floor: f64,
}

impl Default for SparseCholConfig {
    fn default() -> Self {
        Self::from_solver(SolverConfig::default())
    }
}

impl SparseCholConfig {
    pub fn from_solver(solver: SolverConfig) -> Self {
        Self {
            solver,
            inner_max_iter: 1000,
            floor: D_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseCholRow {
    pub row: usize,
    pub iterations: usize,
    pub converged: bool,
    /// `D_ii` after every outer iteration, before clamping.
    pub d_trace: Vec<f64>,
    /// `Q_Chol,i` after every outer iteration while no clamping occurred.
    pub objective_trace: Vec<f64>,
    pub min_unclamped_d: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone)]
pub struct SparseCholResult {
    pub params: ModifiedCholesky,
    pub objective: f64,
    pub per_row: Vec<SparseCholRow>,
    pub converged: bool,
    pub degenerate: bool,
    /// First row whose `D_ii` sits on the floor at termination.
    pub degenerate_row: Option<usize>,
}

impl SparseCholResult {
    pub fn factor(&self) -> CholeskyFactor {
        from_modified_cholesky(&self.params)
    }

    /// Smallest unclamped `D_ii` seen during the run.
    pub fn min_unclamped_d(&self) -> f64 {
        self.per_row
            .iter()
            .map(|r| r.min_unclamped_d)
            .fold(f64::INFINITY, f64::min)
    }

    /// `min_i D_ii` after each outer iteration (rows that stopped earlier keep
    /// their final value).
    pub fn min_d_trace(&self) -> Vec<f64> {
        let len = self.per_row.iter().map(|r| r.d_trace.len()).max().unwrap_or(0);
        (0..len)
            .map(|t| {
                self.per_row
                    .iter()
                    .filter_map(|r| r.d_trace.get(t).or(r.d_trace.last()))
                    .fold(f64::INFINITY, |m, v| m.min(*v))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseDagRow {
    pub row: usize,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SparseDagResult {
    pub t: DMatrix<f64>,
    pub objective: f64,
    pub per_row: Vec<SparseDagRow>,
    pub converged: bool,
}

impl SparseDagResult {
    /// `L = T`, since `D = I`.
    pub fn factor(&self) -> CholeskyFactor {
        CholeskyFactor::from_dense(&self.t).expect("unit lower triangular")
    }

    pub fn max_kkt_residual(&self) -> f64 {
        self.per_row.iter().map(|r| r.kkt_residual).fold(0.0, f64::max)
    }
}

struct LassoOutcome {
    sweeps: usize,
    converged: bool,
}

/// Cyclic coordinate descent for `φᵀAφ + 2φᵀs + μ‖φ‖₁` where `A` is the
/// leading `k x k` block of `cov` and `s = cov[0..k, k]`. `w` holds `Aφ` and
/// is kept current.
fn lasso_cd(cov: &DMatrix<f64>, k: usize, mu: f64, phi: &mut [f64], w: &mut [f64], eps: f64, max_iter: usize) -> LassoOutcome {
    let mut sweeps = 0;
    while sweeps < max_iter {
        sweeps += 1;
        let mut max_change = 0.0f64;
        for j in 0..k {
            let ajj = cov[(j, j)];
            let cross = w[j] - ajj * phi[j] + cov[(j, k)];
            let next = soft_threshold(-2.0 * cross, mu) / (2.0 * ajj);
            let delta = next - phi[j];
            if delta != 0.0 {
                let col = cov.column(j);
                for l in 0..k {
                    w[l] += col[l] * delta;
                }
                phi[j] = next;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < eps {
            return LassoOutcome {
                sweeps,
                converged: true,
            };
        }
    }
    LassoOutcome {
        sweeps,
        converged: false,
    }
}

fn apply_leading(cov: &DMatrix<f64>, k: usize, phi: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; k];
    for (j, &v) in phi.iter().enumerate() {
        if v != 0.0 {
            let col = cov.column(j);
            for l in 0..k {
                w[l] += col[l] * v;
            }
        }
    }
    w
}

/// `φᵀAφ + 2φᵀs + S_ii`.
fn residual_variance(cov: &DMatrix<f64>, k: usize, phi: &[f64], w: &[f64]) -> f64 {
    let quad: f64 = phi.iter().zip(w).map(|(a, b)| a * b).sum();
    let lin: f64 = (0..k).map(|j| phi[j] * cov[(j, k)]).sum();
    quad + 2.0 * lin + cov[(k, k)]
}

/// Lasso subgradient violation with gradient `2(Aφ + s)` and penalty `mu`.
fn lasso_kkt(cov: &DMatrix<f64>, k: usize, mu: f64, phi: &[f64]) -> f64 {
    let w = apply_leading(cov, k, phi);
    (0..k)
        .map(|j| {
            let d = 2.0 * (w[j] + cov[(j, k)]);
            if phi[j] != 0.0 {
                (d + mu * phi[j].signum()).abs()
            } else {
                (d.abs() - mu).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

fn check_covariance(s: &CovarianceMatrix, pen: &PenaltySpec) -> Result<()> {
    pen.validate(s.p())?;
    if let Some(i) = (0..s.p()).find(|&i| !(s.get(i, i) > 0.0)) {
        return Err(CscsError::InvalidCovariance(format!("S[{i}][{i}] must be > 0")));
    }
    Ok(())
}

/// `Q_Chol,i(φ, D) = (φᵀAφ + 2φᵀs + S_ii)/D + log D + λ‖φ‖₁`.
pub fn sparse_cholesky_row_objective(s: &CovarianceMatrix, i: usize, phi: &[f64], d: f64, lambda: f64) -> f64 {
    let w = apply_leading(s.values(), i, phi);
    let resid = residual_variance(s.values(), i, phi, &w);
    resid / d + d.ln() + lambda * phi.iter().map(|v| v.abs()).sum::<f64>()
}

/// `Q_Chol(T, D)` summed over rows.
pub fn sparse_cholesky_objective(s: &CovarianceMatrix, params: &ModifiedCholesky, pen: &PenaltySpec) -> f64 {
    (0..s.p())
        .map(|i| {
            let phi: Vec<f64> = (0..i).map(|j| params.t()[(i, j)]).collect();
            sparse_cholesky_row_objective(s, i, &phi, params.d()[i], pen.for_row(i))
        })
        .sum()
}

/// `Q_Chol(T, I) = tr(TᵀTS) + λ Σ|T_ij|`.
pub fn sparse_dag_objective(s: &CovarianceMatrix, t: &DMatrix<f64>, pen: &PenaltySpec) -> f64 {
    (0..s.p())
        .map(|i| {
            let phi: Vec<f64> = (0..i).map(|j| t[(i, j)]).collect();
            let w = apply_leading(s.values(), i, &phi);
            residual_variance(s.values(), i, &phi, &w) + pen.for_row(i) * phi.iter().map(|v| v.abs()).sum::<f64>()
        })
        .sum()
}

/// Sparse Cholesky with the default start `T = I`, `D = I`.
pub fn fit_sparse_cholesky(s: &CovarianceMatrix, pen: &PenaltySpec, cfg: &SparseCholConfig) -> Result<SparseCholResult> {
    fit_sparse_cholesky_from(s, pen, cfg, None)
}

pub fn fit_sparse_cholesky_from(
    s: &CovarianceMatrix,
    pen: &PenaltySpec,
    cfg: &SparseCholConfig,
    initial: Option<&ModifiedCholesky>,
) -> Result<SparseCholResult> {
    check_covariance(s, pen)?;
    cfg.solver.validate()?;
    let p = s.p();
    if initial.is_some_and(|m| m.p() != p) {
        return Err(CscsError::DimensionMismatch("initial parameters have the wrong size".into()));
    }
    let cov = s.values();
    let eps = cfg.solver.epsilon;
    let inner_eps = eps / 10.0;

    let rows: Vec<(Vec<f64>, f64, SparseCholRow)> = map_indexed(p, true, |i| {
        if i == 0 {
            let d = cov[(0, 0)];
            let row = SparseCholRow {
                row: 0,
                iterations: 0,
                converged: true,
                d_trace: vec![d],
                objective_trace: vec![1.0 + d.ln()],
                min_unclamped_d: d,
                clamped: false,
            };
            return (Vec::new(), d, row);
        }
        let lambda = pen.for_row(i);
        let (mut phi, mut d) = match initial {
            Some(m) => ((0..i).map(|j| m.t()[(i, j)]).collect::<Vec<_>>(), m.d()[i]),
            None => (vec![0.0; i], 1.0),
        };
        let mut w = apply_leading(cov, i, &phi);
        let mut d_trace = Vec::new();
        let mut objective_trace = Vec::new();
        let mut min_unclamped = f64::INFINITY;
        let mut clamped = false;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < cfg.solver.max_iter {
            iterations += 1;
            let old_phi = phi.clone();
            let old_d = d;
            lasso_cd(cov, i, lambda * d, &mut phi, &mut w, inner_eps, cfg.inner_max_iter);
            // keep w from drifting over long runs
            w = apply_leading(cov, i, &phi);
            let raw = residual_variance(cov, i, &phi, &w);
            min_unclamped = min_unclamped.min(raw);
            d_trace.push(raw);
            clamped = raw < cfg.floor;
            d = raw.max(cfg.floor);
            if !clamped {
                let l1: f64 = phi.iter().map(|v| v.abs()).sum();
                objective_trace.push(raw / d + d.ln() + lambda * l1);
            }
            let change = phi
                .iter()
                .zip(&old_phi)
                .map(|(a, b)| (a - b).abs())
                .fold((d - old_d).abs(), f64::max);
            if change < eps {
                converged = true;
                break;
            }
        }
        let row = SparseCholRow {
            row: i,
            iterations,
            converged,
            d_trace,
            objective_trace,
            min_unclamped_d: min_unclamped,
            clamped,
        };
        (phi, d, row)
    });

    let mut t = DMatrix::identity(p, p);
    let mut dvec = DVector::zeros(p);
    let mut per_row = Vec::with_capacity(p);
    for (i, (phi, d, row)) in rows.into_iter().enumerate() {
        for (j, v) in phi.into_iter().enumerate() {
            t[(i, j)] = v;
        }
        dvec[i] = d;
        per_row.push(row);
    }
    let params = ModifiedCholesky::new(t, dvec)?;
    let objective = sparse_cholesky_objective(s, &params, pen);
    let degenerate_row = (0..p).find(|&i| params.d()[i] <= cfg.floor);
    Ok(SparseCholResult {
        objective,
        converged: per_row.iter().all(|r| r.converged),
        degenerate: degenerate_row.is_some(),
        degenerate_row,
        params,
        per_row,
    })
}

/// Sparse DAG, started from `T = I`.
pub fn fit_sparse_dag(s: &CovarianceMatrix, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<SparseDagResult> {
    fit_sparse_dag_from(s, pen, cfg, None)
}

pub fn fit_sparse_dag_from(
    s: &CovarianceMatrix,
    pen: &PenaltySpec,
    cfg: &SolverConfig,
    initial: Option<&DMatrix<f64>>,
) -> Result<SparseDagResult> {
    check_covariance(s, pen)?;
    cfg.validate()?;
    let p = s.p();
    if initial.is_some_and(|t| t.nrows() != p || t.ncols() != p) {
        return Err(CscsError::DimensionMismatch("initial T has the wrong size".into()));
    }
    let cov = s.values();
    let rows: Vec<(Vec<f64>, SparseDagRow)> = map_indexed(p, true, |i| {
        let lambda = pen.for_row(i);
        let mut phi: Vec<f64> = match initial {
            Some(t) => (0..i).map(|j| t[(i, j)]).collect(),
            None => vec![0.0; i],
        };
        if i == 0 {
            return (
                phi,
                SparseDagRow {
                    row: 0,
                    iterations: 0,
                    converged: true,
                    kkt_residual: 0.0,
                },
            );
        }
        let mut w = apply_leading(cov, i, &phi);
        let out = lasso_cd(cov, i, lambda, &mut phi, &mut w, cfg.epsilon, cfg.max_iter);
        let kkt_residual = lasso_kkt(cov, i, lambda, &phi);
        (
            phi,
            SparseDagRow {
                row: i,
                iterations: out.sweeps,
                converged: out.converged,
                kkt_residual,
            },
        )
    });
    let mut t = DMatrix::identity(p, p);
    let mut per_row = Vec::with_capacity(p);
    for (i, (phi, row)) in rows.into_iter().enumerate() {
        for (j, v) in phi.into_iter().enumerate() {
            t[(i, j)] = v;
        }
        per_row.push(row);
    }
    let objective = sparse_dag_objective(s, &t, pen);
    Ok(SparseDagResult {
        objective,
        converged: per_row.iter().all(|r| r.converged),
        t,
        per_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cov(p: usize, v: &[f64]) -> CovarianceMatrix {
        CovarianceMatrix::new(DMatrix::from_row_slice(p, p, v)).unwrap()
    }

    #[test]
    fn single_variable_sparse_cholesky() {
        let s = cov(1, &[3.0]);
        let fit = fit_sparse_cholesky(&s, &PenaltySpec::Scalar(0.5), &SparseCholConfig::default()).unwrap();
        assert_eq!(fit.params.d()[0], 3.0);
        assert!(!fit.degenerate);
    }

    #[test]
    fn dag_identity_cases() {
        let s = cov(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let fit = fit_sparse_dag(&s, &PenaltySpec::Scalar(0.0), &SolverConfig::default()).unwrap();
        assert_eq!(fit.t, DMatrix::identity(3, 3));

        let s = cov(2, &[1.0, 0.4, 0.4, 1.0]);
        let fit = fit_sparse_dag(&s, &PenaltySpec::Scalar(10.0), &SolverConfig::default()).unwrap();
        assert_eq!(fit.t, DMatrix::identity(2, 2));
    }

    #[test]
    fn dag_objective_is_chol_objective_with_unit_d() {
        let s = cov(3, &[2.0, 0.3, -0.2, 0.3, 1.5, 0.4, -0.2, 0.4, 1.0]);
        let pen = PenaltySpec::Scalar(0.2);
        let fit = fit_sparse_dag(&s, &pen, &SolverConfig::new(1e-12, 10_000)).unwrap();
        let td = ModifiedCholesky::new(fit.t.clone(), DVector::from_element(3, 1.0)).unwrap();
        assert_relative_eq!(sparse_cholesky_objective(&s, &td, &pen), fit.objective, epsilon = 1e-10);
        assert!(fit.max_kkt_residual() < 1e-8);
    }

    #[test]
    fn sparse_cholesky_two_variables_unpenalized() {
        // λ = 0, p = 2: φ = −S_12/S_11, D_22 = S_22 − S_12²/S_11
        let s = cov(2, &[2.0, 0.6, 0.6, 1.0]);
        let fit = fit_sparse_cholesky(&s, &PenaltySpec::Scalar(0.0), &SparseCholConfig::default()).unwrap();
        assert_relative_eq!(fit.params.t()[(1, 0)], -0.3, epsilon = 1e-10);
        assert_relative_eq!(fit.params.d()[1], 1.0 - 0.18, epsilon = 1e-10);
        assert!(fit.converged);
    }

    #[test]
    fn rejects_nonpositive_diagonal() {
        let s = CovarianceMatrix::new(DMatrix::identity(2, 2)).unwrap();
        assert!(fit_sparse_dag(&s, &PenaltySpec::PerRow(vec![1.0]), &SolverConfig::default()).is_err());
    }
}
