//! A uniform view of the three estimators: each yields a Cholesky factor
//! `L` with `Ω̂ = LᵀL`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{fit_sparse_cholesky_from, fit_sparse_dag_from, SparseCholConfig};
use crate::covmodel::{to_modified_cholesky, CholeskyFactor, CovarianceMatrix, PenaltySpec};
use crate::cscsfit::{descending_order, fit_cscs_from};
use crate::error::{CscsError, Result};
use crate::rowsolver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cscs,
    SparseCholesky,
    SparseDag,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Cscs, Method::SparseCholesky, Method::SparseDag];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cscs => "cscs",
            Method::SparseCholesky => "sparse-cholesky",
            Method::SparseDag => "sparse-dag",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CscsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cscs" => Ok(Method::Cscs),
            "sparse-cholesky" => Ok(Method::SparseCholesky),
            "sparse-dag" => Ok(Method::SparseDag),
            other => Err(CscsError::Parse(format!("unknown method '{other}'"))),
        }
    }
}

/// Settings shared by every estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub solver: SolverConfig,
    /// Inner lasso sweep cap for Sparse Cholesky.
    pub inner_max_iter: usize,
    pub parallel: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            inner_max_iter: SparseCholConfig::default().inner_max_iter,
            parallel: true,
        }
    }
}

impl EstimatorConfig {
    fn sparse_chol(&self) -> SparseCholConfig {
        SparseCholConfig {
            inner_max_iter: self.inner_max_iter,
            ..SparseCholConfig::from_solver(self.solver.clone())
        }
    }
}

/// Fitted factor plus the diagnostics common to all methods.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub method: Method,
    pub factor: CholeskyFactor,
    pub objective: f64,
    pub converged: bool,
    /// Only Sparse Cholesky can degenerate.
    pub degenerate: bool,
}

pub fn fit_method(
    method: Method,
    s: &CovarianceMatrix,
    pen: &PenaltySpec,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    fit_method_from(method, s, pen, cfg, None)
}

/// Fits `method`, warm-starting from a previous estimate of the same size.
pub fn fit_method_from(
    method: Method,
    s: &CovarianceMatrix,
    pen: &PenaltySpec,
    cfg: &EstimatorConfig,
    warm: Option<&Estimate>,
) -> Result<Estimate> {
    match method {
        Method::Cscs => {
            let fit = fit_cscs_from(s, pen, &cfg.solver, cfg.parallel, warm.map(|e| &e.factor))?;
            Ok(Estimate {
                method,
                factor: fit.factor,
                objective: fit.objective,
                converged: fit.converged,
                degenerate: false,
            })
        }
        Method::SparseCholesky => {
            let init = warm.map(|e| to_modified_cholesky(&e.factor));
            let fit = fit_sparse_cholesky_from(s, pen, &cfg.sparse_chol(), init.as_ref())?;
            Ok(Estimate {
                method,
                factor: fit.factor(),
                objective: fit.objective,
                converged: fit.converged,
                degenerate: fit.degenerate,
            })
        }
        Method::SparseDag => {
            let init = warm.map(|e| e.factor.to_dense());
            let fit = fit_sparse_dag_from(s, pen, &cfg.solver, init.as_ref())?;
            Ok(Estimate {
                method,
                factor: fit.factor(),
                objective: fit.objective,
                converged: fit.converged,
                degenerate: false,
            })
        }
    }
}

/// Fits every grid value from largest to smallest with warm starts; results
/// in the caller's order.
pub fn fit_path(
    method: Method,
    s: &CovarianceMatrix,
    grid: &[f64],
    cfg: &EstimatorConfig,
) -> Result<Vec<Estimate>> {
    let order = descending_order(grid)?;
    let mut slots: Vec<Option<Estimate>> = vec![None; grid.len()];
    let mut prev: Option<Estimate> = None;
    for idx in order {
        // Sparse Cholesky is not convex; a warm start could carry a collapsed
        // D_ii into the next fit, so it always starts from (I, I).
        let warm = if method == Method::SparseCholesky { None } else { prev.as_ref() };
        let est = fit_method_from(method, s, &PenaltySpec::Scalar(grid[idx]), cfg, warm)?;
        prev = Some(est.clone());
        slots[idx] = Some(est);
    }
    Ok(slots.into_iter().map(|e| e.expect("filled")).collect())
}
