//! Penalty selection: BIC, K-fold cross-validation, per-row normal-quantile
//! penalties and default grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::covmodel::{sample_covariance, CholeskyFactor, CovarianceMatrix, DataMatrix, PenaltySpec};
use crate::error::{CscsError, Result};
use crate::estimator::{fit_method, Estimate, EstimatorConfig, Method};
use crate::par::map_indexed;

/// Which entries of `L̂` count toward the BIC degrees of freedom.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonzeroCount {
    /// Every nonzero entry, diagonal included.
    #[default]
    All,
    StrictLower,
}

/// `n·tr(SΩ̂) − n·log|Ω̂| + log(n)·E` with `Ω̂ = L̂ᵀL̂`.
pub fn bic_score(s: &CovarianceMatrix, factor: &CholeskyFactor, n: usize) -> Result<f64> {
    bic_score_with(s, factor, n, NonzeroCount::All)
}

pub fn bic_score_with(s: &CovarianceMatrix, factor: &CholeskyFactor, n: usize, count: NonzeroCount) -> Result<f64> {
    let p = factor.p();
    if s.p() != p {
        return Err(CscsError::DimensionMismatch(format!(
            "factor is {p}x{p}, covariance is {}x{}",
            s.p(),
            s.p()
        )));
    }
    if n == 0 {
        return Err(CscsError::DomainError("sample size must be >= 1".into()));
    }
    // tr(SLᵀL) = Σ_i L_i· S L_i·ᵀ
    let trace: f64 = (0..p)
        .map(|i| crate::covmodel::leading_quadratic(s.values(), factor.row(i)))
        .sum();
    let log_det = 2.0 * factor.log_det();
    let edges = factor.strict_lower_nnz(0.0)
        + match count {
            NonzeroCount::All => p,
            NonzeroCount::StrictLower => 0,
        };
    let n = n as f64;
    Ok(n * trace - n * log_det + n.ln() * edges as f64)
}

/// Random partition of `0..n` into `k` near-equal folds.
///
/// The permutation is a Fisher–Yates shuffle driven by `ChaCha8Rng` seeded
/// with `seed` (for `i` from `n−1` down to `1`, swap `i` with
/// `random_range(0..=i)`); fold `v` takes the shuffled positions `v, v+k, …`.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    let mut folds = vec![Vec::new(); k];
    for (pos, &row) in idx.iter().enumerate() {
        folds[pos % k].push(row);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvScore {
    pub score: f64,
    pub per_fold: Vec<f64>,
}

/// `(1/K) Σ_v (d_v·log|Σ̂_{−v}| + Σ_{i∈I_v} yᵢᵀΣ̂_{−v}⁻¹yᵢ)`.
///
/// Training covariances are uncentered second moments, matching the
/// criterion's mean-zero form; center the data beforehand if needed.
pub fn cv_score(
    data: &DataMatrix,
    method: Method,
    pen: &PenaltySpec,
    k: usize,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<CvScore> {
    if k < 2 || k > data.n() {
        return Err(CscsError::DomainError(format!(
            "fold count {k} must be in 2..={}",
            data.n()
        )));
    }
    let folds = fold_assignment(data.n(), k, seed);
    let per_fold = folds
        .iter()
        .enumerate()
        .map(|(v, test_rows)| {
            let train_rows: Vec<usize> = (0..data.n()).filter(|r| test_rows.binary_search(r).is_err()).collect();
            let s = training_covariance(data, &train_rows, v)?;
            let est = fit_method(method, &s, pen, cfg)?;
            Ok(fold_term(data, test_rows, &est.factor))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CvScore {
        score: per_fold.iter().sum::<f64>() / k as f64,
        per_fold,
    })
}

fn training_covariance(data: &DataMatrix, rows: &[usize], fold: usize) -> Result<CovarianceMatrix> {
    let train = data.select_rows(rows)?;
    sample_covariance(&train, false, false).map_err(|e| match e {
        CscsError::InvalidCovariance(_) => {
            let x = train.values();
            let variable = (0..x.ncols())
                .find(|&j| x.column(j).iter().all(|v| *v == 0.0))
                .unwrap_or(0);
            CscsError::FoldDegenerate { fold, variable }
        }
        other => other,
    })
}

/// `d_v·(−log|Ω̂|) + Σ ‖L̂ y‖²` over the held-out rows.
fn fold_term(data: &DataMatrix, rows: &[usize], factor: &CholeskyFactor) -> f64 {
    let x = data.values();
    let log_det_sigma = -2.0 * factor.log_det();
    let quad: f64 = rows
        .iter()
        .map(|&r| {
            let y: Vec<f64> = x.row(r).iter().copied().collect();
            factor.apply(&y).iter().map(|v| v * v).sum::<f64>()
        })
        .sum();
    rows.len() as f64 * log_det_sigma + quad
}

/// Standard normal quantile `Φ⁻¹(prob)` (Wichura's AS241, PPND16; relative
/// accuracy about 1e-16).
pub fn normal_quantile(prob: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_854_561,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];
    fn poly(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
    }

    if prob.is_nan() || prob <= 0.0 {
        return if prob == 0.0 { f64::NEG_INFINITY } else { f64::NAN };
    }
    if prob >= 1.0 {
        return if prob == 1.0 { f64::INFINITY } else { f64::NAN };
    }
    let q = prob - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { prob } else { 1.0 - prob };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Upper-tail quantile `Z*_q = Φ⁻¹(1 − q)`, computed as `−Φ⁻¹(q)`.
pub fn upper_normal_quantile(q: f64) -> f64 {
    -normal_quantile(q)
}

/// Per-row penalties `λ_i = 2 n^{−1/2} Z*_{α / (2p(i−1))}` for rows `2..p`
/// (1-based); the first row carries no penalized entries and gets 0.
pub fn quantile_penalty(n: usize, p: usize, alpha: f64) -> Result<PenaltySpec> {
    if n == 0 {
        return Err(CscsError::DomainError("sample size must be >= 1".into()));
    }
    if p < 2 {
        return Err(CscsError::DomainError("dimension must be >= 2".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CscsError::DomainError(format!("alpha {alpha} must lie in (0, 1)")));
    }
    let scale = 2.0 / (n as f64).sqrt();
    let mut lambdas = vec![0.0; p];
    for (i, slot) in lambdas.iter_mut().enumerate().skip(1) {
        let q = alpha / (2.0 * p as f64 * i as f64);
        if q >= 1.0 {
            return Err(CscsError::DomainError(format!("tail probability {q} >= 1")));
        }
        *slot = scale * upper_normal_quantile(q);
    }
    Ok(PenaltySpec::PerRow(lambdas))
}

fn fully_sparse(est: &Estimate) -> bool {
    est.factor.strict_lower_nnz(0.0) == 0
}

/// Smallest power-of-two multiple of a starting value (scaled by `max S_ii`)
/// at which `method` returns an all-zero strict lower triangle.
pub fn sparsifying_lambda(method: Method, s: &CovarianceMatrix, cfg: &EstimatorConfig) -> Result<f64> {
    let max_diag = (0..s.p()).map(|i| s.get(i, i)).fold(0.0, f64::max);
    let probe = |lambda: f64| -> Result<bool> {
        fit_method(method, s, &PenaltySpec::Scalar(lambda), cfg).map(|e| fully_sparse(&e))
    };
    let mut lambda = 0.01 * max_diag;
    if probe(lambda)? {
        // shrink while still fully sparse
        for _ in 0..64 {
            if !probe(lambda / 2.0)? {
                return Ok(lambda);
            }
            lambda /= 2.0;
        }
        return Ok(lambda);
    }
    for _ in 0..200 {
        lambda *= 2.0;
        if probe(lambda)? {
            return Ok(lambda);
        }
    }
    Err(CscsError::DomainError("no fully sparsifying penalty found".into()))
}

/// Log-spaced grid from `0.01·λ_top` to `λ_top` (ascending), where `λ_top` is
/// the CSCS sparsifying value from [`sparsifying_lambda`].
pub fn default_grid(s: &CovarianceMatrix, count: usize) -> Result<Vec<f64>> {
    default_grid_for(Method::Cscs, s, count, &EstimatorConfig::default())
}

pub fn default_grid_for(method: Method, s: &CovarianceMatrix, count: usize, cfg: &EstimatorConfig) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(CscsError::DomainError("grid needs at least two points".into()));
    }
    let top = sparsifying_lambda(method, s, cfg)?;
    Ok(log_grid(0.01 * top, top, count))
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[count - 1] = hi;
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Bic,
    Cv,
    Quantile,
}

#[derive(Debug, Clone, Serialize)]
pub struct TuningReport {
    pub criterion: Criterion,
    pub method: Method,
    pub grid: Vec<f64>,
    pub scores: Vec<f64>,
    pub selected: PenaltySpec,
    /// Per-fold terms for each grid value (CV only).
    pub per_fold: Option<Vec<Vec<f64>>>,
}

fn argmin(scores: &[f64]) -> usize {
    scores
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty scores")
}

/// BIC over a grid; fits run along the grid with warm starts.
pub fn tune_bic(
    s: &CovarianceMatrix,
    n: usize,
    method: Method,
    grid: &[f64],
    cfg: &EstimatorConfig,
    count: NonzeroCount,
) -> Result<TuningReport> {
    let fits = crate::estimator::fit_path(method, s, grid, cfg)?;
    let scores = fits
        .iter()
        .map(|e| bic_score_with(s, &e.factor, n, count))
        .collect::<Result<Vec<_>>>()?;
    let best = argmin(&scores);
    Ok(TuningReport {
        criterion: Criterion::Bic,
        method,
        grid: grid.to_vec(),
        selected: PenaltySpec::Scalar(grid[best]),
        scores,
        per_fold: None,
    })
}

/// K-fold CV over a grid. Grid values are evaluated independently.
pub fn tune_cv(
    data: &DataMatrix,
    method: Method,
    grid: &[f64],
    k: usize,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<TuningReport> {
    if grid.is_empty() {
        return Err(CscsError::InvalidPenalty("penalty grid is empty".into()));
    }
    let inner = EstimatorConfig {
        parallel: false,
        ..cfg.clone()
    };
    let results = map_indexed(grid.len(), cfg.parallel, |g| {
        cv_score(data, method, &PenaltySpec::Scalar(grid[g]), k, seed, &inner)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let scores: Vec<f64> = results.iter().map(|r| r.score).collect();
    let best = argmin(&scores);
    Ok(TuningReport {
        criterion: Criterion::Cv,
        method,
        grid: grid.to_vec(),
        selected: PenaltySpec::Scalar(grid[best]),
        scores,
        per_fold: Some(results.into_iter().map(|r| r.per_fold).collect()),
    })
}

/// The quantile rule needs no search; the report carries the per-row vector.
pub fn tune_quantile(n: usize, p: usize, alpha: f64, method: Method) -> Result<TuningReport> {
    let selected = quantile_penalty(n, p, alpha)?;
    Ok(TuningReport {
        criterion: Criterion::Quantile,
        method,
        grid: vec![alpha],
        scores: vec![0.0],
        selected,
        per_fold: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    #[test]
    fn bic_scalar_example() {
        let s = CovarianceMatrix::new(DMatrix::from_element(1, 1, 2.0)).unwrap();
        let l = CholeskyFactor::diagonal(&[1.0 / 2f64.sqrt()]).unwrap();
        let expected = 10.0 - 10.0 * 0.5f64.ln() + 10f64.ln();
        assert_relative_eq!(bic_score(&s, &l, 10).unwrap(), expected, epsilon = 1e-12);
        assert!((bic_score(&s, &l, 10).unwrap() - 19.23406).abs() < 1e-5);
    }

    #[test]
    fn bic_identity_and_edge_increment() {
        let s = CovarianceMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let l = CholeskyFactor::identity(3);
        let n = 20usize;
        assert_relative_eq!(
            bic_score(&s, &l, n).unwrap(),
            (n * 3) as f64 + (n as f64).ln() * 3.0,
            epsilon = 1e-12
        );
        let strict = bic_score_with(&s, &l, n, NonzeroCount::StrictLower).unwrap();
        assert_relative_eq!(strict, (n * 3) as f64, epsilon = 1e-12);
    }

    #[test]
    fn quantile_examples() {
        let pen = quantile_penalty(100, 2, 0.1).unwrap();
        let PenaltySpec::PerRow(v) = &pen else { panic!() };
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 0.3919928).abs() < 1e-6);

        let PenaltySpec::PerRow(a) = quantile_penalty(50, 6, 0.05).unwrap() else { panic!() };
        assert!(a.windows(2).skip(1).all(|w| w[1] > w[0]));
        let PenaltySpec::PerRow(b) = quantile_penalty(200, 6, 0.05).unwrap() else { panic!() };
        for i in 1..6 {
            assert_relative_eq!(b[i], a[i] / 2.0, epsilon = 1e-14);
        }
        assert!(quantile_penalty(10, 1, 0.1).is_err());
        assert!(quantile_penalty(10, 3, 1.0).is_err());
    }

    #[test]
    fn normal_quantile_reference_values() {
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((normal_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-12);
        assert_eq!(normal_quantile(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn folds_partition_rows() {
        let folds = fold_assignment(23, 5, 7);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(folds.iter().all(|f| f.len() == 4 || f.len() == 5));
        assert_eq!(folds, fold_assignment(23, 5, 7));
        assert_ne!(folds, fold_assignment(23, 5, 8));
    }

    #[test]
    fn grid_shape() {
        let g = log_grid(0.01, 1.0, 2);
        assert_eq!(g, vec![0.01, 1.0]);
        let g = log_grid(0.01, 1.0, 5);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_relative_eq!(g[2], 0.1, epsilon = 1e-12);
    }
}
