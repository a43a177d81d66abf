//! Observation, covariance and factor types, parameter conversions and the
//! convex penalized objective.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CscsError, Result};

/// Relative tolerance used when checking symmetry of a covariance matrix.
const SYMMETRY_TOL: f64 = 1e-12;

/// `n x p` observation matrix; rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(CscsError::InvalidData(format!(
                "data must have at least one row and one column, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % values.nrows(), pos / values.nrows());
            return Err(CscsError::InvalidData(format!(
                "non-finite entry at row {r}, column {c}"
            )));
        }
        Ok(Self { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(CscsError::InvalidData("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        Self::new(self.values.select_rows(idx))
    }

    pub fn column_means(&self) -> DVector<f64> {
        let n = self.n() as f64;
        DVector::from_iterator(self.p(), self.values.column_iter().map(|c| c.sum() / n))
    }
}

/// Sample covariance `S` together with its optional low-rank factor.
///
/// The factor is stored transposed: `factor_t` is `n x p` and
/// `S = factor_tᵀ · factor_t`, so row `j` of `B = factor_tᵀ` is the
/// contiguous column `j` of `factor_t`.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    values: DMatrix<f64>,
    factor_t: Option<DMatrix<f64>>,
    sample_size: Option<usize>,
}

impl CovarianceMatrix {
    /// Validates symmetry and strictly positive diagonal.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let p = values.nrows();
        if p == 0 || values.ncols() != p {
            return Err(CscsError::InvalidCovariance(format!(
                "expected a non-empty square matrix, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CscsError::InvalidCovariance("non-finite entry".into()));
        }
        let scale = values.amax().max(f64::MIN_POSITIVE);
        for i in 0..p {
            if values[(i, i)] <= 0.0 {
                return Err(CscsError::InvalidCovariance(format!(
                    "diagonal entry {i} is {} (must be > 0)",
                    values[(i, i)]
                )));
            }
            for j in 0..i {
                if (values[(i, j)] - values[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(CscsError::InvalidCovariance(format!(
                        "not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            values,
            factor_t: None,
            sample_size: None,
        })
    }

    /// Builds `S = factor_tᵀ · factor_t` from an `n x p` factor.
    pub fn from_low_rank(factor_t: DMatrix<f64>) -> Result<Self> {
        let values = factor_t.tr_mul(&factor_t);
        let n = factor_t.nrows();
        let mut cov = Self::new(values)?;
        cov.factor_t = Some(factor_t);
        cov.sample_size = Some(n);
        Ok(cov)
    }

    pub fn with_sample_size(mut self, n: usize) -> Self {
        self.sample_size = Some(n);
        self
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn sample_size(&self) -> Option<usize> {
        self.sample_size
    }

    /// Transposed low-rank factor (`n x p`), if known.
    pub fn low_rank_factor_t(&self) -> Option<&DMatrix<f64>> {
        self.factor_t.as_ref()
    }

    /// Low-rank factor `B` (`p x n`) with `S = B·Bᵀ`, materialized.
    pub fn low_rank_factor(&self) -> Option<DMatrix<f64>> {
        self.factor_t.as_ref().map(|f| f.transpose())
    }
}

/// Options for [`sample_covariance_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleCovOptions {
    pub center: bool,
    pub scale: bool,
    /// Divide by `n - 1` instead of `n`.
    pub unbiased: bool,
}

/// `S = (1/n) Σ yᵢyᵢᵀ` over the (optionally centered and scaled) rows.
pub fn sample_covariance(data: &DataMatrix, center: bool, scale: bool) -> Result<CovarianceMatrix> {
    sample_covariance_with(
        data,
        SampleCovOptions {
            center,
            scale,
            unbiased: false,
        },
    )
}

pub fn sample_covariance_with(data: &DataMatrix, opts: SampleCovOptions) -> Result<CovarianceMatrix> {
    let x = standardize(data, opts.center, opts.scale, opts.unbiased)?;
    let n = data.n();
    let denom = if opts.unbiased {
        if n < 2 {
            return Err(CscsError::InvalidData(
                "unbiased covariance needs at least two rows".into(),
            ));
        }
        (n - 1) as f64
    } else {
        n as f64
    };
    let values = x.tr_mul(&x) / denom;
    let factor_t = x / denom.sqrt();
    let p = values.nrows();
    if let Some(i) = (0..p).find(|&i| values[(i, i)] <= 0.0) {
        return Err(CscsError::InvalidCovariance(format!(
            "variable {i} has zero sample second moment"
        )));
    }
    Ok(CovarianceMatrix {
        values,
        factor_t: Some(factor_t),
        sample_size: Some(n),
    })
}

/// Centers and/or scales columns; scale uses the same denominator as the
/// covariance so that a scaled `S` has unit diagonal.
pub fn standardize(data: &DataMatrix, center: bool, scale: bool, unbiased: bool) -> Result<DMatrix<f64>> {
    let mut x = data.values().clone();
    let n = x.nrows() as f64;
    let denom = if unbiased { (n - 1.0).max(1.0) } else { n };
    for (j, mut col) in x.column_iter_mut().enumerate() {
        let mean = col.sum() / n;
        if center {
            col.add_scalar_mut(-mean);
        }
        if scale {
            let current_mean = if center { 0.0 } else { mean };
            let ss: f64 = col.iter().map(|v| (v - current_mean).powi(2)).sum();
            let sd = (ss / denom).sqrt();
            if !(sd > 0.0) || !sd.is_finite() {
                return Err(CscsError::ZeroVarianceColumn(j));
            }
            col /= sd;
        }
    }
    Ok(x)
}

/// Lower triangular factor `L` with positive diagonal, `Ω = LᵀL`.
///
/// Stored as ragged rows: row `i` holds `L[i][0..=i]`, the last entry being
/// the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CholeskyFactor {
    rows: Vec<Vec<f64>>,
}

impl CholeskyFactor {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(CscsError::InvalidFactor("factor must have at least one row".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(CscsError::InvalidFactor(format!(
                    "row {i} has length {} (expected {})",
                    row.len(),
                    i + 1
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(CscsError::InvalidFactor(format!("row {i} has a non-finite entry")));
            }
            if !(row[i] > 0.0) {
                return Err(CscsError::InvalidFactor(format!(
                    "diagonal entry {i} is {} (must be > 0)",
                    row[i]
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Reads the lower triangle of a dense matrix; entries above the diagonal
    /// must be zero.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let p = m.nrows();
        if m.ncols() != p {
            return Err(CscsError::DimensionMismatch(format!(
                "factor must be square, got {}x{}",
                p,
                m.ncols()
            )));
        }
        for i in 0..p {
            for j in (i + 1)..p {
                if m[(i, j)] != 0.0 {
                    return Err(CscsError::InvalidFactor(format!(
                        "entry ({i}, {j}) above the diagonal is nonzero"
                    )));
                }
            }
        }
        Self::new((0..p).map(|i| (0..=i).map(|j| m[(i, j)]).collect()).collect())
    }

    pub fn identity(p: usize) -> Self {
        Self::diagonal(&vec![1.0; p]).expect("identity is a valid factor")
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(
            diag.iter()
                .enumerate()
                .map(|(i, &d)| {
                    let mut row = vec![0.0; i + 1];
                    row[i] = d;
                    row
                })
                .collect(),
        )
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        debug_assert!(rows.iter().enumerate().all(|(i, r)| r.len() == i + 1 && r[i] > 0.0));
        Self { rows }
    }

    pub fn p(&self) -> usize {
        self.rows.len()
    }

    /// Row `i` up to and including the diagonal.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.rows[i][j]
        }
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.rows[i][i]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let p = self.p();
        DMatrix::from_fn(p, p, |i, j| self.get(i, j))
    }

    /// `log |L| = Σ log L_ii`.
    pub fn log_det(&self) -> f64 {
        (0..self.p()).map(|i| self.diag(i).ln()).sum()
    }

    /// Number of strictly lower entries with magnitude above `threshold`.
    pub fn strict_lower_nnz(&self, threshold: f64) -> usize {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r[..i].iter().filter(|v| v.abs() > threshold).count())
            .sum()
    }

    /// `L·y` for a vector of length `p`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(y).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Modified Cholesky parameters: unit lower triangular `T` and conditional
/// variances `D`, with `Ω = Tᵀ D⁻¹ T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedCholesky {
    t: DMatrix<f64>,
    d: DVector<f64>,
}

impl ModifiedCholesky {
    pub fn new(t: DMatrix<f64>, d: DVector<f64>) -> Result<Self> {
        let p = t.nrows();
        if t.ncols() != p || d.len() != p || p == 0 {
            return Err(CscsError::DimensionMismatch(format!(
                "T is {}x{}, D has length {}",
                t.nrows(),
                t.ncols(),
                d.len()
            )));
        }
        for i in 0..p {
            if t[(i, i)] != 1.0 {
                return Err(CscsError::InvalidFactor(format!("T[{i}][{i}] must be 1")));
            }
            if (i + 1..p).any(|j| t[(i, j)] != 0.0) {
                return Err(CscsError::InvalidFactor(format!(
                    "T row {i} has nonzero entries above the diagonal"
                )));
            }
            if !(d[i] > 0.0) || !d[i].is_finite() {
                return Err(CscsError::InvalidFactor(format!("D[{i}] must be positive")));
            }
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(CscsError::InvalidFactor("T has a non-finite entry".into()));
        }
        Ok(Self { t, d })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            t: DMatrix::identity(p, p),
            d: DVector::from_element(p, 1.0),
        }
    }

    pub fn p(&self) -> usize {
        self.d.len()
    }

    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }

    /// `Tᵀ D⁻¹ T`.
    pub fn precision(&self) -> DMatrix<f64> {
        let mut scaled = self.t.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row /= self.d[i];
        }
        self.t.tr_mul(&scaled)
    }
}

/// `L = D^{-1/2} T`: `D_ii = 1 / L_ii²`, `T_ij = L_ij / L_ii`.
pub fn to_modified_cholesky(l: &CholeskyFactor) -> ModifiedCholesky {
    let p = l.p();
    let mut t = DMatrix::zeros(p, p);
    let mut d = DVector::zeros(p);
    for i in 0..p {
        let lii = l.diag(i);
        d[i] = 1.0 / (lii * lii);
        for j in 0..i {
            t[(i, j)] = l.get(i, j) / lii;
        }
        t[(i, i)] = 1.0;
    }
    ModifiedCholesky { t, d }
}

/// Inverse of [`to_modified_cholesky`]: row `i` of `T` divided by `√D_ii`.
pub fn from_modified_cholesky(td: &ModifiedCholesky) -> CholeskyFactor {
    let rows = (0..td.p())
        .map(|i| {
            let s = td.d[i].sqrt();
            (0..=i).map(|j| td.t[(i, j)] / s).collect()
        })
        .collect();
    CholeskyFactor::from_rows_unchecked(rows)
}

/// `Ω = LᵀL`.
pub fn precision_from_factor(l: &CholeskyFactor) -> DMatrix<f64> {
    let dense = l.to_dense();
    dense.tr_mul(&dense)
}

/// Factor a symmetric positive definite precision as `Ω = LᵀL` with `L` lower
/// triangular. Reversing the variable order turns this into an ordinary
/// `CCᵀ` Cholesky factorization.
pub fn factor_precision(omega: &DMatrix<f64>) -> Result<CholeskyFactor> {
    let p = omega.nrows();
    if omega.ncols() != p || p == 0 {
        return Err(CscsError::DimensionMismatch("precision must be square".into()));
    }
    let rev = DMatrix::from_fn(p, p, |i, j| omega[(p - 1 - i, p - 1 - j)]);
    let chol = rev
        .cholesky()
        .ok_or_else(|| CscsError::InvalidCovariance("precision is not positive definite".into()))?;
    let c = chol.l();
    // L = J Cᵀ J
    let rows = (0..p)
        .map(|i| (0..=i).map(|j| c[(p - 1 - j, p - 1 - i)]).collect())
        .collect();
    CholeskyFactor::new(rows)
}

/// Penalty applied to the strictly lower entries of each row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltySpec {
    Scalar(f64),
    PerRow(Vec<f64>),
}

impl PenaltySpec {
    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            PenaltySpec::Scalar(l) if !(*l >= 0.0) || !l.is_finite() => {
                Err(CscsError::InvalidPenalty(format!("penalty {l} must be finite and >= 0")))
            }
            PenaltySpec::PerRow(v) if v.len() != p => Err(CscsError::InvalidPenalty(format!(
                "per-row penalty has length {} (expected {p})",
                v.len()
            ))),
            PenaltySpec::PerRow(v) if v.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) => Err(
                CscsError::InvalidPenalty("per-row penalties must be finite and >= 0".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn for_row(&self, i: usize) -> f64 {
        match self {
            PenaltySpec::Scalar(l) => *l,
            PenaltySpec::PerRow(v) => v[i],
        }
    }
}

/// `ηᵀ S_k η` for the leading block of size `η.len()`.
pub(crate) fn leading_quadratic(s: &DMatrix<f64>, eta: &[f64]) -> f64 {
    let k = eta.len();
    let mut total = 0.0;
    for (j, &xj) in eta.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let col = s.column(j);
        let dot: f64 = (0..k).map(|l| col[l] * eta[l]).sum();
        total += xj * dot;
    }
    total
}

/// Row term `ηᵀS_iη − 2 log η_i + λ Σ_{j<i} |η_j|`.
pub fn cscs_row_objective(eta: &[f64], s: &CovarianceMatrix, lambda: f64) -> f64 {
    let k = eta.len();
    let l1: f64 = eta[..k - 1].iter().map(|v| v.abs()).sum();
    leading_quadratic(s.values(), eta) - 2.0 * eta[k - 1].ln() + lambda * l1
}

/// `tr(LᵀLS) − 2 log|L| + Σ_i λ_i Σ_{j<i} |L_ij|`, evaluated row by row.
pub fn cscs_objective(l: &CholeskyFactor, s: &CovarianceMatrix, pen: &PenaltySpec) -> Result<f64> {
    let p = l.p();
    if s.p() != p {
        return Err(CscsError::DimensionMismatch(format!(
            "factor is {p}x{p}, covariance is {}x{}",
            s.p(),
            s.p()
        )));
    }
    pen.validate(p)?;
    Ok((0..p)
        .map(|i| cscs_row_objective(l.row(i), s, pen.for_row(i)))
        .sum())
}
