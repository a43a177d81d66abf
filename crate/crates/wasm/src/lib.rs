//! Browser bindings: each export simulates data from a seeded sparse model,
//! runs the estimators and returns a JSON string for the page to draw.

use cscs::baselines::{fit_sparse_cholesky, SparseCholConfig};
use cscs::estimator::{fit_path, EstimatorConfig, Method};
use cscs::experiment::{roc_points, sub_seed};
use cscs::simeval::{auc_windowed, frobenius_error, generate_model, sample_gaussian, EdgeSet, ModelSpec, RocCurve, RocPoint};
use cscs::tuning::default_grid_for;
use cscs::{fit_cscs, precision_from_factor, sample_covariance, PenaltySpec, SolverConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_P: usize = 120;

fn check_size(p: usize, n: usize) -> Result<(), JsError> {
    if !(2..=MAX_P).contains(&p) || n < 2 || n > 1000 {
        return Err(JsError::new(&format!("need 2 <= p <= {MAX_P} and 2 <= n <= 1000")));
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(|e| JsError::new(&e.to_string()))
}

fn js(e: cscs::CscsError) -> JsError {
    JsError::new(&e.to_string())
}

fn demo_config() -> EstimatorConfig {
    EstimatorConfig {
        solver: SolverConfig::new(1e-6, 300),
        inner_max_iter: 100,
        parallel: false,
    }
}

#[derive(Serialize)]
struct PathStep {
    lambda: f64,
    edges: usize,
    true_positives: usize,
    frobenius: f64,
    /// Strict-lower support as `(i, j)` pairs.
    support: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct PathDemo {
    p: usize,
    n: usize,
    truth: Vec<(usize, usize)>,
    steps: Vec<PathStep>,
}

/// CSCS along its default penalty grid: support and Frobenius error per step.
#[wasm_bindgen]
pub fn penalty_path_demo(p: usize, n: usize, zero_fraction: f64, seed: u64, grid_count: usize) -> Result<String, JsError> {
    check_size(p, n)?;
    let model = generate_model(&ModelSpec::standard(p, zero_fraction), sub_seed(seed, 1)).map_err(js)?;
    let data = sample_gaussian(&model, n, sub_seed(seed, 2)).map_err(js)?;
    let s = sample_covariance(&data, true, false).map_err(js)?;
    let cfg = demo_config();
    let grid = default_grid_for(Method::Cscs, &s, grid_count.clamp(2, 60), &cfg).map_err(js)?;
    let fits = fit_path(Method::Cscs, &s, &grid, &cfg).map_err(js)?;
    let steps = grid
        .iter()
        .zip(&fits)
        .map(|(&lambda, est)| {
            let found = EdgeSet::from_factor(&est.factor);
            Ok(PathStep {
                lambda,
                edges: found.len(),
                true_positives: found.edges.intersection(&model.edge_set.edges).count(),
                frobenius: frobenius_error(&model.precision, &precision_from_factor(&est.factor)).map_err(js)?,
                support: found.edges.iter().copied().collect(),
            })
        })
        .collect::<Result<Vec<_>, JsError>>()?;
    to_json(&PathDemo {
        p,
        n,
        truth: model.edge_set.edges.iter().copied().collect(),
        steps,
    })
}

#[derive(Serialize)]
struct RocMethod {
    method: Method,
    auc: f64,
    points: Vec<RocPoint>,
}

#[derive(Serialize)]
struct RocDemo {
    true_edges: usize,
    fpr_window: (f64, f64),
    methods: Vec<RocMethod>,
}

/// ROC curves and windowed AUC of all three estimators on one dataset.
#[wasm_bindgen]
pub fn roc_demo(p: usize, n: usize, zero_fraction: f64, seed: u64, grid_count: usize) -> Result<String, JsError> {
    check_size(p, n)?;
    let model = generate_model(&ModelSpec::standard(p, zero_fraction), sub_seed(seed, 1)).map_err(js)?;
    let data = sample_gaussian(&model, n, sub_seed(seed, 2)).map_err(js)?;
    let s = sample_covariance(&data, true, true).map_err(js)?;
    let cfg = demo_config();
    let window = (0.01, 0.15);
    let methods = Method::ALL
        .iter()
        .map(|&method| {
            let points = roc_points(method, &s, &model.edge_set, grid_count.clamp(2, 60), &cfg).map_err(js)?;
            let auc = auc_windowed(&RocCurve::with_corners(&points), window.0, window.1).map_err(js)?;
            Ok(RocMethod { method, auc, points })
        })
        .collect::<Result<Vec<_>, JsError>>()?;
    to_json(&RocDemo {
        true_edges: model.edge_set.len(),
        fpr_window: window,
        methods,
    })
}

#[derive(Serialize)]
struct DegeneracyDemo {
    /// `min_i D_ii` after each Sparse Cholesky iteration.
    min_d_trace: Vec<f64>,
    degenerate: bool,
    cscs_min_diag: f64,
}

/// Sparse Cholesky on uncentered `n < p` data next to CSCS on the same data.
#[wasm_bindgen]
pub fn degeneracy_demo(p: usize, n: usize, lambda: f64, seed: u64) -> Result<String, JsError> {
    check_size(p, n)?;
    let model = generate_model(&ModelSpec::standard(p, 0.6), sub_seed(seed, 1)).map_err(js)?;
    let data = sample_gaussian(&model, n, sub_seed(seed, 2)).map_err(js)?;
    let s = sample_covariance(&data, false, false).map_err(js)?;
    let pen = PenaltySpec::Scalar(lambda);
    let solver = SolverConfig::new(1e-8, 500);
    let sc = fit_sparse_cholesky(&s, &pen, &SparseCholConfig::from_solver(solver.clone())).map_err(js)?;
    let cscs = fit_cscs(&s, &pen, &solver, false).map_err(js)?;
    to_json(&DegeneracyDemo {
        min_d_trace: sc.min_d_trace(),
        degenerate: sc.degenerate,
        cscs_min_diag: (0..p).map(|i| cscs.factor.diag(i)).fold(f64::INFINITY, f64::min),
    })
}
