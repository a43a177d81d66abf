//! Seeded simulation experiments comparing the three estimators.

use serde::Serialize;

use crate::baselines::{fit_sparse_cholesky, SparseCholConfig};
use crate::covmodel::{precision_from_factor, sample_covariance, PenaltySpec};
use crate::cscsfit::fit_cscs;
use crate::error::Result;
use crate::estimator::{fit_path, EstimatorConfig, Method};
use crate::par::map_indexed;
use crate::rowsolver::SolverConfig;
use crate::simeval::{
    auc_windowed, frobenius_error, generate_model, mean_std, sample_gaussian, selection_rates, EdgeSet,
    ModelSpec, RocCurve, RocPoint,
};
use crate::tuning::default_grid_for;

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const MODEL_STREAM: u64 = 1;
const DATA_STREAM: u64 = 2;

#[derive(Debug, Clone, Serialize)]
pub struct DegeneracyConfig {
    pub p: usize,
    pub n: usize,
    pub seeds: usize,
    pub base_seed: u64,
    pub lambda: f64,
    pub zero_fraction: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub inner_max_iter: usize,
}

impl Default for DegeneracyConfig {
    fn default() -> Self {
        Self {
            p: 8,
            n: 7,
            seeds: 20,
            base_seed: 0,
            lambda: 0.1,
            zero_fraction: 0.6,
            epsilon: 1e-8,
            max_iter: 500,
            inner_max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DegeneracyRun {
    pub seed: u64,
    /// `min_i D_ii` (unclamped) after each Sparse Cholesky iteration.
    pub min_d_trace: Vec<f64>,
    pub min_unclamped_d: f64,
    pub reached_floor: bool,
    pub degenerate_row: Option<usize>,
    pub cscs_min_diag: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegeneracyReport {
    pub config: DegeneracyConfig,
    pub runs: Vec<DegeneracyRun>,
    pub runs_reaching_floor: usize,
    pub cscs_min_diag: f64,
}

/// Fits Sparse Cholesky (from `T = I`, `D = I`) and CSCS on uncentered
/// `n < p` samples of random sparse models, recording how small `D_ii` gets.
pub fn run_degeneracy(cfg: &DegeneracyConfig) -> Result<DegeneracyReport> {
    let solver = SolverConfig::new(cfg.epsilon, cfg.max_iter);
    let sc_cfg = SparseCholConfig {
        inner_max_iter: cfg.inner_max_iter,
        ..SparseCholConfig::from_solver(solver.clone())
    };
    let runs = (0..cfg.seeds)
        .map(|k| {
            let seed = cfg.base_seed + k as u64;
            let model = generate_model(&ModelSpec::standard(cfg.p, cfg.zero_fraction), sub_seed(seed, MODEL_STREAM))?;
            let data = sample_gaussian(&model, cfg.n, sub_seed(seed, DATA_STREAM))?;
            let s = sample_covariance(&data, false, false)?;
            let pen = PenaltySpec::Scalar(cfg.lambda);
            let sc = fit_sparse_cholesky(&s, &pen, &sc_cfg)?;
            let cscs = fit_cscs(&s, &pen, &solver, false)?;
            let min_unclamped_d = sc.min_unclamped_d();
            Ok(DegeneracyRun {
                seed,
                min_d_trace: sc.min_d_trace(),
                min_unclamped_d,
                reached_floor: min_unclamped_d <= 1e-10 || sc.degenerate,
                degenerate_row: sc.degenerate_row,
                cscs_min_diag: (0..cfg.p).map(|i| cscs.factor.diag(i)).fold(f64::INFINITY, f64::min),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DegeneracyReport {
        config: cfg.clone(),
        runs_reaching_floor: runs.iter().filter(|r| r.reached_floor).count(),
        cscs_min_diag: runs.iter().map(|r| r.cscs_min_diag).fold(f64::INFINITY, f64::min),
        runs,
    })
}

/// One-sided paired sign test of "first beats second".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub p_value: f64,
}

pub fn sign_test(first: &[f64], second: &[f64]) -> SignTest {
    let wins = first.iter().zip(second).filter(|(a, b)| a > b).count();
    let losses = first.iter().zip(second).filter(|(a, b)| a < b).count();
    let ties = first.len().min(second.len()) - wins - losses;
    let m = wins + losses;
    // P(Binomial(m, 1/2) >= wins)
    let mut p_value = 0.0;
    let mut coef = 1.0f64; // C(m, k)
    for k in 0..=m {
        if k >= wins {
            p_value += coef;
        }
        coef = coef * (m - k) as f64 / (k + 1) as f64;
    }
    p_value /= 2f64.powi(m as i32);
    SignTest {
        wins,
        losses,
        ties,
        p_value: p_value.min(1.0),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationConfig {
    pub p: usize,
    pub n: usize,
    pub reps: usize,
    pub zero_fraction: f64,
    pub grid_count: usize,
    pub seed: u64,
    pub center: bool,
    pub scale: bool,
    pub methods: Vec<Method>,
    pub epsilon: f64,
    pub max_iter: usize,
    pub inner_max_iter: usize,
    pub fpr_window: (f64, f64),
    pub parallel: bool,
}

impl SimulationConfig {
    /// ROC defaults: data centered and scaled, 40 grid points, FPR window
    /// `[0.01, 0.15]`.
    pub fn roc(p: usize, n: usize, reps: usize) -> Self {
        Self {
            p,
            n,
            reps,
            zero_fraction: 0.98,
            grid_count: 40,
            seed: 0,
            center: true,
            scale: true,
            methods: Method::ALL.to_vec(),
            epsilon: 1e-6,
            max_iter: 500,
            inner_max_iter: 200,
            fpr_window: (0.01, 0.15),
            parallel: true,
        }
    }

    /// Estimation defaults: centered, unscaled data so `Ω̂` is on the scale of
    /// `Ω₀`; 20 grid points; CSCS against Sparse DAG.
    pub fn frobenius(p: usize, n: usize, reps: usize) -> Self {
        Self {
            scale: false,
            grid_count: 20,
            methods: vec![Method::Cscs, Method::SparseDag],
            ..Self::roc(p, n, reps)
        }
    }

    fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            solver: SolverConfig::new(self.epsilon, self.max_iter),
            inner_max_iter: self.inner_max_iter,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodAuc {
    pub method: Method,
    pub mean: f64,
    pub std: f64,
    pub per_rep: Vec<f64>,
    /// ROC points of the first replication.
    pub example_curve: Vec<RocPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RocAucReport {
    pub config: SimulationConfig,
    pub true_edges: usize,
    pub methods: Vec<MethodAuc>,
    /// CSCS against each other method, on per-replication AUCs.
    pub cscs_sign_tests: Vec<(Method, SignTest)>,
}

impl RocAucReport {
    pub fn method(&self, m: Method) -> Option<&MethodAuc> {
        self.methods.iter().find(|a| a.method == m)
    }
}

/// ROC points along a penalty path for one method.
pub fn roc_points(
    method: Method,
    s: &crate::covmodel::CovarianceMatrix,
    truth: &EdgeSet,
    grid_count: usize,
    cfg: &EstimatorConfig,
) -> Result<Vec<RocPoint>> {
    let grid = default_grid_for(method, s, grid_count, cfg)?;
    let fits = fit_path(method, s, &grid, cfg)?;
    grid.iter()
        .zip(&fits)
        .map(|(&lambda, est)| {
            let (tpr, fpr) = selection_rates(&EdgeSet::from_factor(&est.factor), truth)?;
            Ok(RocPoint { lambda, tpr, fpr })
        })
        .collect()
}

/// One model per `(p, seed)`, `reps` datasets, windowed AUC per method.
pub fn run_roc_auc(cfg: &SimulationConfig) -> Result<RocAucReport> {
    let model = generate_model(&ModelSpec::standard(cfg.p, cfg.zero_fraction), sub_seed(cfg.seed, MODEL_STREAM))?;
    let est = cfg.estimator();
    let per_rep: Vec<Result<Vec<Vec<RocPoint>>>> = map_indexed(cfg.reps, cfg.parallel, |rep| {
        let data = sample_gaussian(&model, cfg.n, sub_seed(sub_seed(cfg.seed, DATA_STREAM), rep as u64))?;
        let s = sample_covariance(&data, cfg.center, cfg.scale)?;
        cfg.methods
            .iter()
            .map(|&m| roc_points(m, &s, &model.edge_set, cfg.grid_count, &est))
            .collect()
    });
    let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;

    let (lo, hi) = cfg.fpr_window;
    let mut methods = Vec::new();
    for (mi, &method) in cfg.methods.iter().enumerate() {
        let aucs = per_rep
            .iter()
            .map(|rep| auc_windowed(&RocCurve::with_corners(&rep[mi]), lo, hi))
            .collect::<Result<Vec<f64>>>()?;
        let (mean, std) = mean_std(&aucs);
        methods.push(MethodAuc {
            method,
            mean,
            std,
            per_rep: aucs,
            example_curve: per_rep.first().map(|r| r[mi].clone()).unwrap_or_default(),
        });
    }
    let cscs_sign_tests = match methods.iter().find(|m| m.method == Method::Cscs) {
        Some(c) => methods
            .iter()
            .filter(|m| m.method != Method::Cscs)
            .map(|m| (m.method, sign_test(&c.per_rep, &m.per_rep)))
            .collect(),
        None => Vec::new(),
    };
    Ok(RocAucReport {
        config: cfg.clone(),
        true_edges: model.edge_set.len(),
        methods,
        cscs_sign_tests,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodFrobenius {
    pub method: Method,
    /// Mean over replications of the grid value at each grid position.
    pub mean_lambda: Vec<f64>,
    pub mean_error: Vec<f64>,
    pub min_mean_error: f64,
    pub argmin: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusReport {
    pub config: SimulationConfig,
    pub methods: Vec<MethodFrobenius>,
}

impl FrobeniusReport {
    pub fn method(&self, m: Method) -> Option<&MethodFrobenius> {
        self.methods.iter().find(|a| a.method == m)
    }
}

/// `‖Ω₀ − Ω̂‖_F` along each method's default grid, averaged by grid position.
pub fn run_frobenius_path(cfg: &SimulationConfig) -> Result<FrobeniusReport> {
    let model = generate_model(&ModelSpec::standard(cfg.p, cfg.zero_fraction), sub_seed(cfg.seed, MODEL_STREAM))?;
    let est = cfg.estimator();
    let per_rep: Vec<Result<Vec<(Vec<f64>, Vec<f64>)>>> = map_indexed(cfg.reps, cfg.parallel, |rep| {
        let data = sample_gaussian(&model, cfg.n, sub_seed(sub_seed(cfg.seed, DATA_STREAM), rep as u64))?;
        let s = sample_covariance(&data, cfg.center, cfg.scale)?;
        cfg.methods
            .iter()
            .map(|&m| {
                let grid = default_grid_for(m, &s, cfg.grid_count, &est)?;
                let fits = fit_path(m, &s, &grid, &est)?;
                let errors = fits
                    .iter()
                    .map(|e| frobenius_error(&model.precision, &precision_from_factor(&e.factor)))
                    .collect::<Result<Vec<_>>>()?;
                Ok((grid, errors))
            })
            .collect()
    });
    let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;
    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let avg = |pick: &dyn Fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<f64> {
                (0..cfg.grid_count)
                    .map(|g| mean_std(&per_rep.iter().map(|r| pick(&r[mi])[g]).collect::<Vec<_>>()).0)
                    .collect()
            };
            let mean_lambda = avg(&|r| &r.0);
            let mean_error = avg(&|r| &r.1);
            let (argmin, min_mean_error) = mean_error
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty grid");
            MethodFrobenius {
                method,
                mean_lambda,
                mean_error,
                min_mean_error,
                argmin,
            }
        })
        .collect();
    Ok(FrobeniusReport {
        config: cfg.clone(),
        methods,
    })
}
