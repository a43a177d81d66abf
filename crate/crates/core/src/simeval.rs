//! Synthetic ground-truth models, Gaussian sampling and evaluation metrics.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::covmodel::{CholeskyFactor, DataMatrix, ModifiedCholesky};
use crate::error::{CscsError, Result};

/// Magnitude above which an estimated entry counts as an edge.
pub const EDGE_THRESHOLD: f64 = 1e-8;

/// Protocol for drawing a random sparse `(T₀, D₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    pub p: usize,
    /// Fraction of strictly lower entries of `T₀` set to zero.
    pub zero_fraction: f64,
    pub coef_range: (f64, f64),
    pub d_range: (f64, f64),
}

impl ModelSpec {
    /// Magnitudes in `[0.3, 0.7]`, conditional variances in `[2, 5]`.
    pub fn standard(p: usize, zero_fraction: f64) -> Self {
        Self {
            p,
            zero_fraction,
            coef_range: (0.3, 0.7),
            d_range: (2.0, 5.0),
        }
    }
}

/// Strictly lower `(i, j)` positions, `j < i`, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeSet {
    pub p: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(p: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            p,
            edges: edges.into_iter().collect(),
        }
    }

    /// Strictly lower entries of a factor above [`EDGE_THRESHOLD`].
    pub fn from_factor(l: &CholeskyFactor) -> Self {
        Self::from_dense_lower(&l.to_dense())
    }

    pub fn from_dense_lower(m: &DMatrix<f64>) -> Self {
        let p = m.nrows();
        let edges = (1..p).flat_map(|i| (0..i).map(move |j| (i, j)));
        Self::new(p, edges.filter(|&(i, j)| m[(i, j)].abs() > EDGE_THRESHOLD))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn candidates(&self) -> usize {
        self.p * (self.p.saturating_sub(1)) / 2
    }
}

#[derive(Debug, Clone)]
pub struct GroundTruthModel {
    pub params: ModifiedCholesky,
    pub precision: DMatrix<f64>,
    pub edge_set: EdgeSet,
    pub seed: u64,
}

impl GroundTruthModel {
    pub fn covariance(&self) -> DMatrix<f64> {
        self.precision
            .clone()
            .cholesky()
            .expect("precision is positive definite")
            .inverse()
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(CscsError::DegenerateConfig(format!(
            "{name} range [{lo}, {hi}] must satisfy 0 < lo <= hi"
        )));
    }
    Ok(())
}

/// Draws `T₀` with exactly `round(zero_fraction·p(p−1)/2)` zero strictly lower
/// entries (positions uniform without replacement), the rest uniform in
/// `coef_range` with a random sign; `D₀` uniform in `d_range`.
pub fn generate_model(spec: &ModelSpec, seed: u64) -> Result<GroundTruthModel> {
    let p = spec.p;
    if p < 2 {
        return Err(CscsError::DegenerateConfig("p must be >= 2".into()));
    }
    if !(spec.zero_fraction >= 0.0 && spec.zero_fraction < 1.0) {
        return Err(CscsError::DegenerateConfig(format!(
            "zero fraction {} must lie in [0, 1)",
            spec.zero_fraction
        )));
    }
    check_range("coefficient", spec.coef_range)?;
    check_range("conditional variance", spec.d_range)?;
    let m = p * (p - 1) / 2;
    let zeros = (spec.zero_fraction * m as f64).round() as usize;
    let n_edges = m - zeros.min(m);
    if n_edges == 0 {
        return Err(CscsError::DegenerateConfig(format!(
            "zero fraction {} leaves no edges among {m} entries",
            spec.zero_fraction
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<(usize, usize)> = (1..p).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let mut chosen: Vec<usize> = sample(&mut rng, m, n_edges).into_vec();
    chosen.sort_unstable();
    let mut t = DMatrix::identity(p, p);
    let (lo, hi) = spec.coef_range;
    for &idx in &chosen {
        let (i, j) = positions[idx];
        let mag = if lo == hi { lo } else { rng.random_range(lo..=hi) };
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        t[(i, j)] = sign * mag;
    }
    let (dlo, dhi) = spec.d_range;
    let d = DVector::from_fn(p, |_, _| if dlo == dhi { dlo } else { rng.random_range(dlo..=dhi) });
    let params = ModifiedCholesky::new(t, d)?;
    let precision = params.precision();
    Ok(GroundTruthModel {
        edge_set: EdgeSet::new(p, chosen.iter().map(|&i| positions[i])),
        precision,
        params,
        seed,
    })
}

/// `n` draws from `N(0, Ω₀⁻¹)`: each row solves `T₀y = D₀^{1/2}z` by forward
/// substitution.
pub fn sample_gaussian(model: &GroundTruthModel, n: usize, seed: u64) -> Result<DataMatrix> {
    if n == 0 {
        return Err(CscsError::InvalidData("sample count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = model.params.t();
    let sd: Vec<f64> = model.params.d().iter().map(|d| d.sqrt()).collect();
    let p = sd.len();
    let mut out = DMatrix::zeros(n, p);
    let mut y = vec![0.0; p];
    for r in 0..n {
        for i in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            let mut acc = sd[i] * z;
            for j in 0..i {
                acc -= t[(i, j)] * y[j];
            }
            y[i] = acc;
        }
        for i in 0..p {
            out[(r, i)] = y[i];
        }
    }
    DataMatrix::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub lambda: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// `(TPR, FPR)` of an estimated pattern against the truth.
pub fn selection_rates(found: &EdgeSet, truth: &EdgeSet) -> Result<(f64, f64)> {
    if found.p != truth.p {
        return Err(CscsError::DimensionMismatch(format!(
            "patterns over {} and {} variables",
            found.p, truth.p
        )));
    }
    if truth.is_empty() {
        return Err(CscsError::EmptyTruth);
    }
    let hits = found.edges.intersection(&truth.edges).count();
    let false_hits = found.len() - hits;
    let negatives = truth.candidates() - truth.len();
    let fpr = if negatives == 0 { 0.0 } else { false_hits as f64 / negatives as f64 };
    Ok((hits as f64 / truth.len() as f64, fpr))
}

/// ROC curve sorted by FPR; TPR is averaged over points sharing an FPR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` pairs, strictly increasing in FPR.
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn from_points(points: &[RocPoint]) -> Self {
        Self::from_pairs(points.iter().map(|p| (p.fpr, p.tpr)))
    }

    /// Adds the `(0, 0)` and `(1, 1)` corners before building the curve.
    pub fn with_corners(points: &[RocPoint]) -> Self {
        Self::from_pairs(
            points
                .iter()
                .map(|p| (p.fpr, p.tpr))
                .chain([(0.0, 0.0), (1.0, 1.0)]),
        )
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut raw: Vec<(f64, f64)> = pairs.into_iter().collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            let fpr = raw[i].0;
            let mut j = i;
            let mut sum = 0.0;
            while j < raw.len() && raw[j].0 == fpr {
                sum += raw[j].1;
                j += 1;
            }
            points.push((fpr, sum / (j - i) as f64));
            i = j;
        }
        Self { points }
    }

    /// TPR at `fpr` by linear interpolation, flat beyond the ends.
    pub fn tpr_at(&self, fpr: f64) -> f64 {
        let pts = &self.points;
        if fpr <= pts[0].0 {
            return pts[0].1;
        }
        if fpr >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let k = pts.partition_point(|p| p.0 <= fpr);
        let (x0, y0) = pts[k - 1];
        let (x1, y1) = pts[k];
        y0 + (y1 - y0) * (fpr - x0) / (x1 - x0)
    }
}

/// Trapezoidal area under TPR(FPR) over `[fpr_lo, fpr_hi]`, not normalized by
/// the window width.
pub fn auc_windowed(curve: &RocCurve, fpr_lo: f64, fpr_hi: f64) -> Result<f64> {
    if curve.points.len() < 2 {
        return Err(CscsError::InsufficientCurve);
    }
    if !(fpr_lo < fpr_hi) {
        return Err(CscsError::DomainError(format!("empty FPR window [{fpr_lo}, {fpr_hi}]")));
    }
    let mut xs = vec![fpr_lo];
    xs.extend(curve.points.iter().map(|p| p.0).filter(|&x| x > fpr_lo && x < fpr_hi));
    xs.push(fpr_hi);
    let area = xs
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (curve.tpr_at(w[0]) + curve.tpr_at(w[1])))
        .sum();
    Ok(area)
}

/// `‖Ω − Ω̂‖_F`.
pub fn frobenius_error(truth: &DMatrix<f64>, estimate: &DMatrix<f64>) -> Result<f64> {
    if truth.shape() != estimate.shape() {
        return Err(CscsError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            truth.shape(),
            estimate.shape()
        )));
    }
    Ok((truth - estimate).norm())
}

/// Gaussian log-likelihood of the test rows under mean `mean` and precision
/// `LᵀL`; the quadratic form is `‖L(y − μ)‖²`.
pub fn gaussian_loglik(test: &DataMatrix, mean: &[f64], factor: &CholeskyFactor) -> Result<f64> {
    let p = factor.p();
    if test.p() != p || mean.len() != p {
        return Err(CscsError::DimensionMismatch(format!(
            "test has {} columns, mean {}, factor {p}",
            test.p(),
            mean.len()
        )));
    }
    let log_det = 2.0 * factor.log_det();
    let norm_const = p as f64 * (2.0 * std::f64::consts::PI).ln();
    let x = test.values();
    let terms = (0..test.n()).map(|r| {
        let centered: Vec<f64> = (0..p).map(|j| x[(r, j)] - mean[j]).collect();
        let quad: f64 = factor.apply(&centered).iter().map(|v| v * v).sum();
        0.5 * (log_det - quad - norm_const)
    });
    Ok(kahan_sum(terms))
}

/// `μ₂ + Σ₂₁ Σ₁₁⁻¹ (y₁ − μ₁)` with the solve done through a Cholesky
/// factorization of `Σ₁₁`.
pub fn conditional_forecast(mean: &[f64], cov: &DMatrix<f64>, split: usize, y1: &[f64]) -> Result<Vec<f64>> {
    let p = mean.len();
    if cov.shape() != (p, p) || split == 0 || split >= p || y1.len() != split {
        return Err(CscsError::DimensionMismatch(format!(
            "mean {p}, covariance {:?}, split {split}, observed {}",
            cov.shape(),
            y1.len()
        )));
    }
    let s11 = cov.view((0, 0), (split, split)).clone_owned();
    let chol = s11.cholesky().ok_or(CscsError::SingularBlock)?;
    let dev = DVector::from_iterator(split, y1.iter().zip(mean).map(|(y, m)| y - m));
    let coef = chol.solve(&dev);
    let s21 = cov.view((split, 0), (p - split, split));
    let pred = s21 * coef;
    Ok((0..p - split).map(|t| mean[split + t] + pred[t]).collect())
}

/// Mean absolute error per coordinate over rows of aligned matrices.
pub fn forecast_error(predictions: &DMatrix<f64>, actuals: &DMatrix<f64>) -> Result<Vec<f64>> {
    if predictions.shape() != actuals.shape() || predictions.nrows() == 0 {
        return Err(CscsError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            predictions.shape(),
            actuals.shape()
        )));
    }
    let rows = predictions.nrows() as f64;
    Ok((0..predictions.ncols())
        .map(|t| {
            kahan_sum((0..predictions.nrows()).map(|i| (predictions[(i, t)] - actuals[(i, t)]).abs())) / rows
        })
        .collect())
}

/// Compensated summation.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = kahan_sum(values.iter().copied()) / n;
    let var = if values.len() > 1 {
        kahan_sum(values.iter().map(|v| (v - mean).powi(2))) / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn model_edge_counts() {
        let m = generate_model(&ModelSpec::standard(2, 0.0), 1).unwrap();
        assert_eq!(m.edge_set.len(), 1);
        let v = m.params.t()[(1, 0)].abs();
        assert!((0.3..=0.7).contains(&v));

        let m = generate_model(&ModelSpec::standard(8, 0.6), 3).unwrap();
        assert_eq!(m.edge_set.len(), 28 - 17);
        assert_eq!(EdgeSet::from_dense_lower(m.params.t()), m.edge_set);
        assert!(m.params.d().iter().all(|d| (2.0..=5.0).contains(d)));

        let again = generate_model(&ModelSpec::standard(8, 0.6), 3).unwrap();
        assert_eq!(again.params, m.params);
        assert!(generate_model(&ModelSpec::standard(3, 0.99), 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = generate_model(&ModelSpec::standard(4, 0.5), 9).unwrap();
        let a = sample_gaussian(&m, 10, 4).unwrap();
        let b = sample_gaussian(&m, 10, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_gaussian(&m, 10, 5).unwrap());
    }

    #[test]
    fn selection_rate_examples() {
        let truth = EdgeSet::new(3, [(1, 0)]);
        assert_eq!(selection_rates(&truth, &truth).unwrap(), (1.0, 0.0));
        assert_eq!(selection_rates(&EdgeSet::new(3, []), &truth).unwrap(), (0.0, 0.0));
        assert_eq!(selection_rates(&EdgeSet::new(3, [(2, 0)]), &truth).unwrap(), (0.0, 0.5));
        assert!(matches!(
            selection_rates(&truth, &EdgeSet::new(3, [])),
            Err(CscsError::EmptyTruth)
        ));
    }

    #[test]
    fn auc_examples() {
        let ones = RocCurve::from_pairs([(0.0, 1.0), (1.0, 1.0)]);
        assert_relative_eq!(auc_windowed(&ones, 0.01, 0.15).unwrap(), 0.14, epsilon = 1e-15);
        let zeros = RocCurve::from_pairs([(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(auc_windowed(&zeros, 0.01, 0.15).unwrap(), 0.0);
        let chance = RocCurve::from_pairs([(0.0, 0.0), (1.0, 1.0)]);
        assert!((auc_windowed(&chance, 0.01, 0.15).unwrap() - 0.0112).abs() < 1e-12);
        assert!(auc_windowed(&RocCurve::from_pairs([(0.0, 0.0)]), 0.0, 1.0).is_err());
    }

    #[test]
    fn ties_are_averaged() {
        let c = RocCurve::from_pairs([(0.1, 0.2), (0.1, 0.4), (0.0, 0.0)]);
        assert_eq!(c.points.len(), 2);
        assert_relative_eq!(c.points[1].1, 0.3);
    }

    #[test]
    fn frobenius_examples() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert_eq!(frobenius_error(&i2, &i2).unwrap(), 0.0);
        assert_relative_eq!(frobenius_error(&i2, &(&i2 * 2.0)).unwrap(), 2f64.sqrt());
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 5.0, 1.0, 3.0, 1.0, 4.0]);
        let b = DMatrix::from_row_slice(3, 3, &[0.5, 2.0, 2.0, 2.0, 5.5, 1.0, 2.0, 1.0, 4.0]);
        // differences: 0.5, 1, 0.5, 1
        assert_relative_eq!(frobenius_error(&a, &b).unwrap(), (0.25f64 + 1.0 + 0.25 + 1.0).sqrt());
        assert!(frobenius_error(&a, &i2).is_err());
    }

    #[test]
    fn loglik_examples() {
        let data = DataMatrix::from_rows(&[vec![0.0]]).unwrap();
        let l = CholeskyFactor::identity(1);
        assert_relative_eq!(
            gaussian_loglik(&data, &[0.0], &l).unwrap(),
            -0.5 * (2.0 * std::f64::consts::PI).ln(),
            epsilon = 1e-15
        );

        let rows = vec![vec![0.3, -1.2], vec![1.1, 0.4], vec![-0.6, 2.0]];
        let l = CholeskyFactor::diagonal(&[1.5, 0.7]).unwrap();
        let base = gaussian_loglik(&DataMatrix::from_rows(&rows).unwrap(), &[0.1, -0.2], &l).unwrap();
        let shifted: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0] + 3.0, r[1] - 1.0]).collect();
        let moved = gaussian_loglik(&DataMatrix::from_rows(&shifted).unwrap(), &[3.1, -1.2], &l).unwrap();
        assert_relative_eq!(base, moved, epsilon = 1e-12);

        let col = |j: usize| DataMatrix::from_rows(&rows.iter().map(|r| vec![r[j]]).collect::<Vec<_>>()).unwrap();
        let l0 = CholeskyFactor::diagonal(&[1.5]).unwrap();
        let l1 = CholeskyFactor::diagonal(&[0.7]).unwrap();
        let sum = gaussian_loglik(&col(0), &[0.1], &l0).unwrap() + gaussian_loglik(&col(1), &[-0.2], &l1).unwrap();
        assert_relative_eq!(base, sum, epsilon = 1e-12);
    }

    #[test]
    fn forecast_examples() {
        let diag = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 3.0]);
        let mu = [1.0, 2.0, 3.0];
        assert_eq!(conditional_forecast(&mu, &diag, 1, &[7.0]).unwrap(), vec![2.0, 3.0]);
        let full = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.3, 0.5, 1.0, 0.2, 0.3, 0.2, 3.0]);
        let f = conditional_forecast(&mu, &full, 2, &[1.0, 2.0]).unwrap();
        assert_relative_eq!(f[0], 3.0, epsilon = 1e-14);

        let rho = 0.6;
        let c = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        let f = conditional_forecast(&[0.0, 0.0], &c, 1, &[1.7]).unwrap();
        assert!((f[0] - rho * 1.7).abs() < 1e-12);

        let singular = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            conditional_forecast(&mu, &singular, 2, &[0.0, 0.0]),
            Err(CscsError::SingularBlock)
        ));
    }

    #[test]
    fn forecast_error_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(forecast_error(&a, &a).unwrap(), vec![0.0, 0.0]);
        let one = DMatrix::from_row_slice(1, 1, &[1.5]);
        assert_eq!(forecast_error(&one, &DMatrix::from_row_slice(1, 1, &[1.0])).unwrap(), vec![0.5]);
        let pred = DMatrix::from_row_slice(2, 1, &[0.0, 0.0]);
        let act = DMatrix::from_row_slice(2, 1, &[1.0, -3.0]);
        assert_eq!(forecast_error(&pred, &act).unwrap(), vec![2.0]);
    }
}
