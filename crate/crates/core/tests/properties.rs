mod common;

use cscs::baselines::{fit_sparse_cholesky, fit_sparse_dag, sparse_cholesky_objective, sparse_dag_objective, SparseCholConfig};
use cscs::covmodel::{cscs_row_objective, factor_precision, ModifiedCholesky};
use cscs::rowsolver::{minimize_row, minimize_row_with_path, ComputePath};
use cscs::simeval::EdgeSet;
use cscs::{
    cscs_objective, fit_cscs, from_modified_cholesky, penalty_path, precision_from_factor, to_modified_cholesky,
    CholeskyFactor, CovarianceMatrix, PenaltySpec, RowProblem, SolverConfig,
};
use common::{random_cov, random_factor, scalar};
use nalgebra::DVector;
use proptest::prelude::*;

fn cfg() -> SolverConfig {
    SolverConfig::new(1e-11, 50_000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn modified_cholesky_round_trip(p in 1usize..7, seed in 0u64..10_000) {
        let l = random_factor(p, seed);
        let back = from_modified_cholesky(&to_modified_cholesky(&l));
        for i in 0..p {
            for j in 0..=i {
                prop_assert!((back.get(i, j) - l.get(i, j)).abs() <= 1e-12 * (1.0 + l.get(i, j).abs()));
            }
        }
        let td = to_modified_cholesky(&l);
        let diff = (td.precision() - precision_from_factor(&l)).norm();
        prop_assert!(diff <= 1e-9 * (1.0 + precision_from_factor(&l).norm()));
    }

    #[test]
    fn sparsity_is_shared_between_parameterizations(p in 2usize..7, seed in 0u64..10_000) {
        let s = random_cov(p + 2, p, seed);
        let fit = fit_cscs(&s, &scalar(0.3), &cfg(), false).unwrap();
        let td = to_modified_cholesky(&fit.factor);
        for i in 0..p {
            for j in 0..i {
                prop_assert_eq!(fit.factor.get(i, j) == 0.0, td.t()[(i, j)] == 0.0);
            }
        }
    }

    #[test]
    fn objective_is_sum_of_rows(p in 1usize..7, seed in 0u64..10_000, lambda in 0.0f64..2.0) {
        let s = random_cov(p + 3, p, seed);
        let l = random_factor(p, seed + 1);
        let total = cscs_objective(&l, &s, &scalar(lambda)).unwrap();
        let rows: f64 = (0..p).map(|i| cscs_row_objective(l.row(i), &s, lambda)).sum();
        prop_assert!((total - rows).abs() <= 1e-10 * (1.0 + total.abs()));
    }

    #[test]
    fn objective_is_convex_along_segments(p in 1usize..6, seed in 0u64..10_000, t in 0.0f64..1.0) {
        let s = random_cov(2, p, seed);
        let a = random_factor(p, seed + 11);
        let b = random_factor(p, seed + 12);
        let mix = CholeskyFactor::new(
            (0..p).map(|i| (0..=i).map(|j| (1.0 - t) * a.get(i, j) + t * b.get(i, j)).collect()).collect(),
        ).unwrap();
        let pen = scalar(0.4);
        let fa = cscs_objective(&a, &s, &pen).unwrap();
        let fb = cscs_objective(&b, &s, &pen).unwrap();
        let fm = cscs_objective(&mix, &s, &pen).unwrap();
        prop_assert!(fm <= (1.0 - t) * fa + t * fb + 1e-9 * (1.0 + fa.abs() + fb.abs()));
    }

    #[test]
    fn row_sweeps_never_increase_the_objective(k in 1usize..8, n in 1usize..10, seed in 0u64..10_000, lambda in 0.0f64..1.5) {
        let s = random_cov(n.max(2), k, seed);
        let prob = RowProblem::new(s.values(), lambda).unwrap();
        let sol = minimize_row(&prob, &cfg()).unwrap();
        for w in sol.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
        }
    }

    #[test]
    fn dense_and_low_rank_paths_agree(k in 2usize..9, n in 2usize..6, seed in 0u64..10_000, lambda in 0.01f64..1.0) {
        let s = random_cov(n, k, seed);
        let ft = s.low_rank_factor_t().unwrap().clone();
        let prob = RowProblem::new(s.values(), lambda).unwrap().with_low_rank(&ft).unwrap();
        let dense = minimize_row_with_path(&prob, &cfg(), ComputePath::Dense).unwrap();
        let low = minimize_row_with_path(&prob, &cfg(), ComputePath::LowRank).unwrap();
        prop_assert!((dense.objective() - low.objective()).abs() <= 1e-8 * (1.0 + dense.objective().abs()));
    }

    #[test]
    fn warm_path_matches_cold_fits(p in 2usize..6, seed in 0u64..10_000) {
        let s = random_cov(p + 1, p, seed);
        let grid = [0.05, 0.8, 0.2];
        let path = penalty_path(&s, &grid, &cfg()).unwrap();
        for (pt, &lambda) in path.iter().zip(&grid) {
            prop_assert_eq!(pt.lambda, lambda);
            let cold = fit_cscs(&s, &scalar(lambda), &cfg(), false).unwrap();
            prop_assert!((pt.fit.objective - cold.objective).abs() <= 1e-8 * (1.0 + cold.objective.abs()));
        }
    }

    #[test]
    fn parallel_and_serial_fits_are_identical(p in 2usize..9, seed in 0u64..10_000) {
        let s = random_cov(p, p, seed);
        let a = fit_cscs(&s, &scalar(0.2), &cfg(), true).unwrap();
        let b = fit_cscs(&s, &scalar(0.2), &cfg(), false).unwrap();
        prop_assert_eq!(a.factor, b.factor);
    }

    #[test]
    fn precision_factorization_round_trip(p in 1usize..7, seed in 0u64..10_000) {
        let l = random_factor(p, seed);
        let back = factor_precision(&precision_from_factor(&l)).unwrap();
        for i in 0..p {
            for j in 0..=i {
                prop_assert!((back.get(i, j) - l.get(i, j)).abs() <= 1e-7 * (1.0 + l.get(i, j).abs()));
            }
        }
    }
}

#[test]
fn sparse_dag_is_sparse_cholesky_with_unit_d() {
    let s = random_cov(6, 5, 3);
    let l = random_factor(5, 4);
    let td = to_modified_cholesky(&l);
    let unit = ModifiedCholesky::new(td.t().clone(), DVector::from_element(5, 1.0)).unwrap();
    let pen = scalar(0.3);
    let a = sparse_cholesky_objective(&s, &unit, &pen);
    let b = sparse_dag_objective(&s, td.t(), &pen);
    assert!((a - b).abs() <= 1e-10);
}

#[test]
fn baselines_descend_and_sparsify() {
    let s = random_cov(20, 6, 8);
    let sc = fit_sparse_cholesky(&s, &scalar(0.2), &SparseCholConfig::default()).unwrap();
    assert!(!sc.degenerate);
    for row in &sc.per_row {
        for w in row.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-10 * (1.0 + w[0].abs()));
        }
    }
    let dag = fit_sparse_dag(&s, &scalar(0.2), &cfg()).unwrap();
    assert!(dag.max_kkt_residual() < 1e-6);

    let huge = fit_sparse_dag(&s, &scalar(1e6), &cfg()).unwrap();
    assert!(EdgeSet::from_dense_lower(&huge.t).is_empty());
}

#[test]
fn per_row_penalties_apply_row_by_row() {
    let s = random_cov(12, 4, 21);
    let per_row = PenaltySpec::PerRow(vec![0.0, 1e6, 0.0, 1e6]);
    let fit = fit_cscs(&s, &per_row, &cfg(), false).unwrap();
    assert!(fit.factor.row(1)[..1].iter().all(|v| *v == 0.0));
    assert!(fit.factor.row(3)[..3].iter().all(|v| *v == 0.0));
    let unpenalized = fit_cscs(&s, &scalar(0.0), &cfg(), false).unwrap();
    assert!((fit.factor.get(2, 0) - unpenalized.factor.get(2, 0)).abs() < 1e-8);
}

#[test]
fn low_rank_covariance_matches_dense_fit() {
    let data = common::random_data(4, 9, 31);
    let s = cscs::sample_covariance(&data, true, false).unwrap();
    let dense = CovarianceMatrix::new(s.values().clone()).unwrap();
    let a = fit_cscs(&s, &scalar(0.1), &cfg(), false).unwrap();
    let b = fit_cscs(&dense, &scalar(0.1), &cfg(), false).unwrap();
    assert!((a.objective - b.objective).abs() < 1e-8 * (1.0 + b.objective.abs()));
}
