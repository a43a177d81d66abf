//! Reference implementations that share no code with the library solvers.
#![allow(dead_code)]

use cscs::{CholeskyFactor, CovarianceMatrix, DataMatrix, PenaltySpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `n x p` matrix of iid standard normals with a mild common factor so that
/// the columns are correlated.
pub fn random_data(n: usize, p: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: DMatrix<f64> = DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal));
    let common: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let w: Vec<f64> = (0..p).map(|_| rng.random_range(-0.8..0.8)).collect();
    DataMatrix::new(DMatrix::from_fn(n, p, |r, c| z[(r, c)] + w[c] * common[r])).unwrap()
}

pub fn random_cov(n: usize, p: usize, seed: u64) -> CovarianceMatrix {
    cscs::sample_covariance(&random_data(n, p, seed), true, false).unwrap()
}

/// Largest eigenvalue of a symmetric PSD matrix.
fn spectral_bound(a: &DMatrix<f64>) -> f64 {
    a.clone().symmetric_eigenvalues().amax()
}

/// `xᵀAx − 2 log x_k + λ Σ_{j<k}|x_j|`.
pub fn row_value(a: &DMatrix<f64>, x: &[f64], lambda: f64) -> f64 {
    let k = x.len();
    let mut quad = 0.0;
    for i in 0..k {
        for j in 0..k {
            quad += x[i] * a[(i, j)] * x[j];
        }
    }
    let l1: f64 = x[..k - 1].iter().map(|v| v.abs()).sum();
    quad - 2.0 * x[k - 1].ln() + lambda * l1
}

/// Accelerated proximal gradient on one row with adaptive restart.
///
/// Smooth part `xᵀAx`; the prox of `λ|x_j|` is soft-thresholding and the prox
/// of `−2 log x_k` with step `t` is `(v + √(v² + 8t))/2`.
pub fn fista_row(a: &DMatrix<f64>, lambda: f64, iters: usize) -> Vec<f64> {
    let k = a.nrows();
    let t = 1.0 / (2.0 * spectral_bound(a)).max(1e-12);
    let prox = |v: &[f64]| -> Vec<f64> {
        let mut out = v.to_vec();
        for j in 0..k - 1 {
            let m = (v[j].abs() - t * lambda).max(0.0);
            out[j] = v[j].signum() * m;
        }
        out[k - 1] = 0.5 * (v[k - 1] + (v[k - 1] * v[k - 1] + 8.0 * t).sqrt());
        out
    };
    let step = |y: &[f64]| -> Vec<f64> {
        let v: Vec<f64> = (0..k)
            .map(|i| y[i] - t * 2.0 * (0..k).map(|j| a[(i, j)] * y[j]).sum::<f64>())
            .collect();
        prox(&v)
    };
    let mut x = vec![0.0; k];
    x[k - 1] = 1.0 / a[(k - 1, k - 1)].sqrt();
    let mut y = x.clone();
    let mut theta = 1.0f64;
    let mut fx = row_value(a, &x, lambda);
    for _ in 0..iters {
        let xn = step(&y);
        let fxn = row_value(a, &xn, lambda);
        if fxn > fx {
            // restart momentum
            theta = 1.0;
            y = x.clone();
            continue;
        }
        let theta_n = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_n;
        y = (0..k).map(|i| xn[i] + beta * (xn[i] - x[i])).collect();
        x = xn;
        fx = fxn;
        theta = theta_n;
    }
    x
}

/// Full CSCS objective minimum from the proximal-gradient oracle.
pub fn oracle_objective(s: &CovarianceMatrix, lambda: f64, iters: usize) -> f64 {
    (1..=s.p())
        .map(|k| {
            let a = s.values().view((0, 0), (k, k)).clone_owned();
            let x = fista_row(&a, lambda, iters);
            row_value(&a, &x, lambda)
        })
        .sum()
}

/// Random lower-triangular start with positive diagonal.
pub fn random_factor(p: usize, seed: u64) -> CholeskyFactor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..p)
        .map(|i| {
            (0..=i)
                .map(|j| if j == i { rng.random_range(0.2..3.0) } else { rng.random_range(-2.0..2.0) })
                .collect()
        })
        .collect();
    CholeskyFactor::new(rows).unwrap()
}

pub fn scalar(lambda: f64) -> PenaltySpec {
    PenaltySpec::Scalar(lambda)
}
