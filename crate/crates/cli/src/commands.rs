use std::fs;
use std::path::{Path, PathBuf};

use cscs::baselines::{fit_sparse_cholesky, fit_sparse_dag, SparseCholConfig};
use cscs::covmodel::{factor_precision, sample_covariance, CovarianceMatrix, DataMatrix, PenaltySpec};
use cscs::experiment::{run_degeneracy, run_frobenius_path, run_roc_auc, DegeneracyConfig, SimulationConfig};
use cscs::io::{read_matrix_file, write_factor_file, write_matrix_file, write_modified_cholesky_files};
use cscs::report::report_json;
use cscs::simeval::{
    frobenius_error, gaussian_loglik, generate_model, sample_gaussian, selection_rates, EdgeSet, ModelSpec,
};
use cscs::tuning::{default_grid_for, quantile_penalty, tune_bic, tune_cv, tune_quantile, NonzeroCount};
use cscs::{fit_cscs, precision_from_factor, CholeskyFactor, CscsError, EstimatorConfig, Method, SolverConfig};
use nalgebra::DVector;
use serde::Serialize;

use crate::{CriterionArg, EvaluateArgs, ExperimentArgs, ExperimentName, FitArgs, InputArgs, SimulateArgs, SolverArgs, TuneArgs};

pub enum CliError {
    Invalid(String),
    NotConverged(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::NotConverged(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::NotConverged(m) => m,
        }
    }
}

impl From<CscsError> for CliError {
    fn from(e: CscsError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

struct Loaded {
    s: CovarianceMatrix,
    data: Option<DataMatrix>,
    n: Option<usize>,
}

fn load(input: &InputArgs) -> Result<Loaded, CliError> {
    let m = read_matrix_file(&input.input)?;
    if input.covariance {
        let mut s = CovarianceMatrix::new(m)?;
        if let Some(n) = input.n {
            s = s.with_sample_size(n);
        }
        Ok(Loaded { s, data: None, n: input.n })
    } else {
        let data = DataMatrix::new(m)?;
        let s = sample_covariance(&data, !input.no_center, input.scale)?;
        let n = Some(data.n());
        Ok(Loaded { s, data: Some(data), n })
    }
}

fn estimator_config(solver: &SolverArgs) -> Result<EstimatorConfig, CliError> {
    let cfg = EstimatorConfig {
        solver: SolverConfig::new(solver.epsilon, solver.max_iter),
        inner_max_iter: solver.inner_max_iter,
        parallel: true,
    };
    cfg.solver.validate()?;
    if cfg.inner_max_iter == 0 {
        return Err(invalid("--inner-max-iter must be at least 1"));
    }
    Ok(cfg)
}

fn emit<T: Serialize>(kind: &str, body: &T, path: Option<&Path>) -> CliResult {
    let json = report_json(kind, body)?;
    match path {
        Some(p) => fs::write(p, json + "\n").map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn distinct(paths: &[&Path]) -> CliResult {
    for (i, a) in paths.iter().enumerate() {
        if paths[i + 1..].contains(a) {
            return Err(invalid(format!("path {} is used twice", a.display())));
        }
    }
    Ok(())
}

fn default_d_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.d.csv"))
}

#[derive(Serialize)]
struct RowReport {
    row: usize,
    iterations: usize,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    kkt_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_unclamped_d: Option<f64>,
}

#[derive(Serialize)]
struct FitReport {
    method: Method,
    p: usize,
    n: Option<usize>,
    penalty: PenaltySpec,
    objective: f64,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    degenerate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_kkt_residual: Option<f64>,
    strict_lower_nonzeros: usize,
    per_row: Vec<RowReport>,
    wall_time_seconds: f64,
}

pub fn fit(a: FitArgs) -> CliResult {
    let d_path = a.d_output.clone().unwrap_or_else(|| default_d_path(&a.output));
    let mut paths = vec![a.input.input.as_path(), a.output.as_path()];
    if let Some(r) = &a.report {
        paths.push(r);
    }
    if Method::from(a.method) != Method::Cscs {
        paths.push(&d_path);
    }
    distinct(&paths)?;

    let loaded = load(&a.input)?;
    let p = loaded.s.p();
    let pen = match (a.lambda, a.quantile) {
        (Some(l), None) => PenaltySpec::Scalar(l),
        (None, Some(alpha)) => {
            let n = loaded.n.ok_or_else(|| invalid("--quantile on a covariance input needs --n"))?;
            quantile_penalty(n, p, alpha)?
        }
        _ => return Err(invalid("give exactly one of --lambda and --quantile")),
    };
    pen.validate(p)?;
    let cfg = estimator_config(&a.solver)?;
    let start = std::time::Instant::now();

    let report = match Method::from(a.method) {
        Method::Cscs => {
            let fit = fit_cscs(&loaded.s, &pen, &cfg.solver, cfg.parallel)?;
            write_factor_file(&a.output, &fit.factor)?;
            FitReport {
                method: Method::Cscs,
                p,
                n: loaded.n,
                objective: fit.objective,
                converged: fit.converged,
                degenerate: None,
                max_kkt_residual: Some(fit.max_kkt_residual()),
                strict_lower_nonzeros: fit.factor.strict_lower_nnz(0.0),
                per_row: fit
                    .per_row
                    .iter()
                    .map(|r| RowReport {
                        row: r.row,
                        iterations: r.iterations,
                        converged: r.converged,
                        kkt_residual: Some(r.kkt_residual),
                        min_unclamped_d: None,
                    })
                    .collect(),
                penalty: pen,
                wall_time_seconds: fit.wall_time_seconds,
            }
        }
        Method::SparseCholesky => {
            let sc_cfg = SparseCholConfig {
                inner_max_iter: cfg.inner_max_iter,
                ..SparseCholConfig::from_solver(cfg.solver.clone())
            };
            let fit = fit_sparse_cholesky(&loaded.s, &pen, &sc_cfg)?;
            write_modified_cholesky_files(&a.output, &d_path, &fit.params)?;
            FitReport {
                method: Method::SparseCholesky,
                p,
                n: loaded.n,
                objective: fit.objective,
                converged: fit.converged,
                degenerate: Some(fit.degenerate),
                max_kkt_residual: None,
                strict_lower_nonzeros: fit.factor().strict_lower_nnz(0.0),
                per_row: fit
                    .per_row
                    .iter()
                    .map(|r| RowReport {
                        row: r.row,
                        iterations: r.iterations,
                        converged: r.converged,
                        kkt_residual: None,
                        min_unclamped_d: Some(r.min_unclamped_d),
                    })
                    .collect(),
                penalty: pen,
                wall_time_seconds: start.elapsed().as_secs_f64(),
            }
        }
        Method::SparseDag => {
            let fit = fit_sparse_dag(&loaded.s, &pen, &cfg.solver)?;
            let td = cscs::ModifiedCholesky::new(fit.t.clone(), DVector::from_element(p, 1.0))?;
            write_modified_cholesky_files(&a.output, &d_path, &td)?;
            FitReport {
                method: Method::SparseDag,
                p,
                n: loaded.n,
                objective: fit.objective,
                converged: fit.converged,
                degenerate: None,
                max_kkt_residual: Some(fit.max_kkt_residual()),
                strict_lower_nonzeros: fit.factor().strict_lower_nnz(0.0),
                per_row: fit
                    .per_row
                    .iter()
                    .map(|r| RowReport {
                        row: r.row,
                        iterations: r.iterations,
                        converged: r.converged,
                        kkt_residual: Some(r.kkt_residual),
                        min_unclamped_d: None,
                    })
                    .collect(),
                penalty: pen,
                wall_time_seconds: start.elapsed().as_secs_f64(),
            }
        }
    };
    emit("fit", &report, a.report.as_deref())?;
    if a.strict && !report.converged {
        let rows: Vec<usize> = report.per_row.iter().filter(|r| !r.converged).map(|r| r.row).collect();
        return Err(CliError::NotConverged(format!("rows {rows:?} hit --max-iter without converging")));
    }
    Ok(())
}

pub fn tune(a: TuneArgs) -> CliResult {
    if let Some(r) = &a.report {
        distinct(&[a.input.input.as_path(), r])?;
    }
    let loaded = load(&a.input)?;
    let method = Method::from(a.method);
    let cfg = estimator_config(&a.solver)?;
    let grid = match (&a.grid, a.criterion) {
        (_, CriterionArg::Quantile) => Vec::new(),
        (Some(g), _) => {
            if g.is_empty() || g.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(invalid("--grid values must be finite and >= 0"));
            }
            g.clone()
        }
        (None, _) => default_grid_for(method, &loaded.s, a.grid_count, &cfg)?,
    };
    let report = match a.criterion {
        CriterionArg::Bic => {
            let n = loaded.n.ok_or_else(|| invalid("BIC on a covariance input needs --n"))?;
            let count = if a.bic_strict_lower { NonzeroCount::StrictLower } else { NonzeroCount::All };
            tune_bic(&loaded.s, n, method, &grid, &cfg, count)?
        }
        CriterionArg::Cv => {
            let data = loaded
                .data
                .as_ref()
                .ok_or_else(|| invalid("cross-validation needs raw data, not --covariance"))?;
            // folds use second moments, so remove the mean up front
            let x = cscs::covmodel::standardize(data, !a.input.no_center, a.input.scale, false)?;
            tune_cv(&DataMatrix::new(x)?, method, &grid, a.k, a.seed, &cfg)?
        }
        CriterionArg::Quantile => {
            let n = loaded.n.ok_or_else(|| invalid("the quantile rule on a covariance input needs --n"))?;
            tune_quantile(n, loaded.s.p(), a.alpha, method)?
        }
    };
    emit("tune", &report, a.report.as_deref())
}

#[derive(Serialize)]
struct SimulateReport {
    p: usize,
    n: usize,
    zero_fraction: f64,
    seed: u64,
    true_edges: usize,
    candidates: usize,
}

pub fn simulate(a: SimulateArgs) -> CliResult {
    let mut paths = vec![a.output.as_path()];
    paths.extend(a.precision_output.as_deref());
    paths.extend(a.report.as_deref());
    distinct(&paths)?;
    let model = generate_model(&ModelSpec::standard(a.p, a.zero_fraction), a.seed)?;
    let data = sample_gaussian(&model, a.n, cscs::experiment::sub_seed(a.seed, 2))?;
    write_matrix_file(&a.output, data.values())?;
    if let Some(path) = &a.precision_output {
        write_matrix_file(path, &model.precision)?;
    }
    let report = SimulateReport {
        p: a.p,
        n: a.n,
        zero_fraction: a.zero_fraction,
        seed: a.seed,
        true_edges: model.edge_set.len(),
        candidates: model.edge_set.candidates(),
    };
    emit("simulate", &report, a.report.as_deref())
}

#[derive(Serialize)]
struct EvaluateReport {
    p: usize,
    frobenius_error: f64,
    true_edges: usize,
    estimated_edges: usize,
    tpr: f64,
    fpr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_loglik: Option<f64>,
}

pub fn evaluate(a: EvaluateArgs) -> CliResult {
    let factor = CholeskyFactor::from_dense(&read_matrix_file(&a.factor)?)?;
    let truth = read_matrix_file(&a.truth)?;
    let p = factor.p();
    if truth.shape() != (p, p) {
        return Err(invalid(format!("truth is {:?}, factor is {p}x{p}", truth.shape())));
    }
    let true_edges = EdgeSet::from_factor(&factor_precision(&truth)?);
    let found = EdgeSet::from_factor(&factor);
    let (tpr, fpr) = selection_rates(&found, &true_edges)?;
    let test_loglik = match &a.test {
        Some(path) => {
            let test = DataMatrix::new(read_matrix_file(path)?)?;
            Some(gaussian_loglik(&test, &vec![0.0; p], &factor)?)
        }
        None => None,
    };
    let report = EvaluateReport {
        p,
        frobenius_error: frobenius_error(&truth, &precision_from_factor(&factor))?,
        true_edges: true_edges.len(),
        estimated_edges: found.len(),
        tpr,
        fpr,
        test_loglik,
    };
    emit("evaluate", &report, a.report.as_deref())
}

pub fn experiment(a: ExperimentArgs) -> CliResult {
    match a.name {
        ExperimentName::Degeneracy => {
            let d = DegeneracyConfig::default();
            let cfg = DegeneracyConfig {
                p: a.p.unwrap_or(d.p),
                n: a.n.unwrap_or(d.n),
                seeds: a.seeds.unwrap_or(d.seeds),
                base_seed: a.seed,
                lambda: a.lambda.unwrap_or(d.lambda),
                zero_fraction: a.zero_fraction.unwrap_or(d.zero_fraction),
                ..d
            };
            emit("experiment-degeneracy", &run_degeneracy(&cfg)?, a.report.as_deref())
        }
        ExperimentName::RocAuc | ExperimentName::FrobeniusPath => {
            let roc = matches!(a.name, ExperimentName::RocAuc);
            let (p, n) = if roc { (100, 25) } else { (50, 25) };
            let (p, n, reps) = (a.p.unwrap_or(p), a.n.unwrap_or(n), a.reps.unwrap_or(20));
            let mut cfg = if roc { SimulationConfig::roc(p, n, reps) } else { SimulationConfig::frobenius(p, n, reps) };
            cfg.seed = a.seed;
            if let Some(z) = a.zero_fraction {
                cfg.zero_fraction = z;
            }
            if let Some(g) = a.grid_count {
                cfg.grid_count = g;
            }
            if reps == 0 || cfg.grid_count < 2 {
                return Err(invalid("need --reps >= 1 and --grid-count >= 2"));
            }
            if roc {
                emit("experiment-roc-auc", &run_roc_auc(&cfg)?, a.report.as_deref())
            } else {
                emit("experiment-frobenius-path", &run_frobenius_path(&cfg)?, a.report.as_deref())
            }
        }
    }
}
