//! Sparse Cholesky factors of inverse covariance matrices via a jointly
//! convex penalized likelihood, with the Sparse Cholesky and Sparse DAG
//! baselines, penalty tuning and a simulation/evaluation harness.
//!
//! The estimator works on `Ω = LᵀL` with `L` lower triangular. Its objective
//! splits into one independent convex problem per row of `L`, each solved by
//! cyclic coordinate descent with closed-form updates
//! ([`rowsolver::minimize_row`]), so [`cscsfit::fit_cscs`] is a parallel map
//! over rows.

pub mod baselines;
pub mod covmodel;
pub mod cscsfit;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod io;
mod par;
pub mod report;
pub mod rowsolver;
pub mod simeval;
pub mod tuning;

pub use covmodel::{
    cscs_objective, from_modified_cholesky, precision_from_factor, sample_covariance, to_modified_cholesky,
    CholeskyFactor, CovarianceMatrix, DataMatrix, ModifiedCholesky, PenaltySpec,
};
pub use cscsfit::{fit_cscs, penalty_path, FitResult};
pub use error::{CscsError, Result};
pub use estimator::{EstimatorConfig, Method};
pub use rowsolver::{minimize_row, RowProblem, RowSolution, SolverConfig};
