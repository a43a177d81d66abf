//! The CSCS estimator: `p` independent row problems, one per row of `L`.

use serde::Serialize;

use crate::covmodel::{cscs_objective, CholeskyFactor, CovarianceMatrix, PenaltySpec};
use crate::error::{CscsError, Result};
use crate::par::{map_indexed, Stopwatch};
use crate::rowsolver::{minimize_row, ComputePath, RowProblem, RowSolution, SolverConfig};

/// Per-row diagnostics kept in a [`FitResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSummary {
    pub row: usize,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    pub objective: f64,
    pub path: ComputePath,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub factor: CholeskyFactor,
    pub objective: f64,
    pub per_row: Vec<RowSummary>,
    pub penalty: PenaltySpec,
    pub converged: bool,
    pub wall_time_seconds: f64,
}

impl FitResult {
    pub fn max_kkt_residual(&self) -> f64 {
        self.per_row.iter().map(|r| r.kkt_residual).fold(0.0, f64::max)
    }

    pub fn total_iterations(&self) -> usize {
        self.per_row.iter().map(|r| r.iterations).sum()
    }
}

/// Minimizes the convex objective over lower triangular `L` with positive
/// diagonal. Row `i` is the row problem with `A = S_i` (leading block) and
/// penalty `λ_i`; the first row is `1/√S_11`.
///
/// `parallel` only changes scheduling; each row runs the same arithmetic
/// either way.
pub fn fit_cscs(
    s: &CovarianceMatrix,
    pen: &PenaltySpec,
    cfg: &SolverConfig,
    parallel: bool,
) -> Result<FitResult> {
    fit_cscs_from(s, pen, cfg, parallel, None)
}

/// As [`fit_cscs`], warm-starting each row from `initial` when given.
pub fn fit_cscs_from(
    s: &CovarianceMatrix,
    pen: &PenaltySpec,
    cfg: &SolverConfig,
    parallel: bool,
    initial: Option<&CholeskyFactor>,
) -> Result<FitResult> {
    let start = Stopwatch::start();
    let p = s.p();
    pen.validate(p)?;
    cfg.validate()?;
    if let Some(i) = (0..p).find(|&i| !(s.get(i, i) > 0.0)) {
        return Err(CscsError::InvalidCovariance(format!("S[{i}][{i}] must be > 0")));
    }
    if let Some(init) = initial {
        if init.p() != p {
            return Err(CscsError::DimensionMismatch(format!(
                "initial factor is {}x{}, covariance is {p}x{p}",
                init.p(),
                init.p()
            )));
        }
    }

    let solutions: Vec<RowSolution> = map_indexed(p, parallel, |i| {
        let k = i + 1;
        let prob = RowProblem::unchecked(s.values(), k, pen.for_row(i), s.low_rank_factor_t());
        if k == 1 {
            return first_row(&prob);
        }
        let row_cfg = SolverConfig {
            initial: initial.map(|l| l.row(i).to_vec()),
            ..cfg.clone()
        };
        minimize_row(&prob, &row_cfg).expect("validated row problem")
    });

    let per_row = solutions
        .iter()
        .enumerate()
        .map(|(i, sol)| RowSummary {
            row: i,
            iterations: sol.iterations,
            converged: sol.converged,
            kkt_residual: sol.kkt_residual,
            objective: sol.objective(),
            path: sol.path,
        })
        .collect::<Vec<_>>();
    let factor = CholeskyFactor::from_rows_unchecked(solutions.into_iter().map(|s| s.x).collect());
    let objective = cscs_objective(&factor, s, pen)?;
    Ok(FitResult {
        converged: per_row.iter().all(|r| r.converged),
        factor,
        objective,
        per_row,
        penalty: pen.clone(),
        wall_time_seconds: start.seconds(),
    })
}

fn first_row(prob: &RowProblem<'_>) -> RowSolution {
    let s11 = prob.a(0, 0);
    let x = vec![1.0 / s11.sqrt()];
    let value = prob.objective(&x);
    RowSolution {
        kkt_residual: crate::rowsolver::kkt_check(prob, &x),
        x,
        iterations: 0,
        converged: true,
        objective_trace: vec![value],
        path: ComputePath::Dense,
    }
}

/// One point of a penalty path.
#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub fit: FitResult,
}

/// Fits every `λ` in `grid`, sweeping from the largest to the smallest and
/// warm-starting each fit from the previous one. Results come back in the
/// caller's grid order.
pub fn penalty_path(s: &CovarianceMatrix, grid: &[f64], cfg: &SolverConfig) -> Result<Vec<PathPoint>> {
    let order = descending_order(grid)?;
    let mut slots: Vec<Option<PathPoint>> = vec![None; grid.len()];
    let mut previous: Option<CholeskyFactor> = None;
    for idx in order {
        let lambda = grid[idx];
        let fit = fit_cscs_from(s, &PenaltySpec::Scalar(lambda), cfg, true, previous.as_ref())?;
        previous = Some(fit.factor.clone());
        slots[idx] = Some(PathPoint { lambda, fit });
    }
    Ok(slots.into_iter().map(|p| p.expect("every slot filled")).collect())
}

/// Indices of `grid` sorted by decreasing value; rejects empty or negative grids.
pub(crate) fn descending_order(grid: &[f64]) -> Result<Vec<usize>> {
    if grid.is_empty() {
        return Err(CscsError::InvalidPenalty("penalty grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(CscsError::InvalidPenalty(format!("grid value {bad} must be finite and >= 0")));
    }
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
    Ok(order)
}
