use altrecon::linalg::{left_factor_matrix, mat, right_factor_matrix, vectorize};
use altrecon::probgen::{gen_hankel_lowrank, gen_lowrank};
use altrecon::sensing::{apply_operator, make_gaussian_operator, prewhiten};
use altrecon::{
    adls_solve, ale_solve, als_solve, srer_db, LinearStructure, Matrix, MeasurementModel, NoiseSpec, SolverOptions,
    Vector,
};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-5.0f64..5.0, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v))
}

fn structures(n1: usize, n2: usize) -> [LinearStructure; 3] {
    [LinearStructure::hankel(n1, n2), LinearStructure::toeplitz(n1, n2), LinearStructure::unstructured(n1, n2)]
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..8, 1usize..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factor_matrices_reproduce_the_product(
        (n1, n2, r) in (1usize..6, 1usize..6, 1usize..4),
        m in 1usize..12,
        seed in any::<u64>(),
    ) {
        let abar = make_gaussian_operator(m, n1, n2, seed);
        let l = Matrix::from_fn(n1, r, |i, j| ((i * 7 + j * 3) as f64).sin());
        let rf = Matrix::from_fn(r, n2, |i, j| ((i * 5 + j * 11 + 1) as f64).cos());
        let direct = &abar * vectorize(&(&l * &rf));
        let via_r = right_factor_matrix(&abar, &l).unwrap() * vectorize(&rf);
        let via_l = left_factor_matrix(&abar, &rf).unwrap() * vectorize(&l);
        let scale = direct.norm().max(1.0);
        prop_assert!((&via_r - &direct).norm() <= 1e-12 * scale);
        prop_assert!((&via_l - &direct).norm() <= 1e-12 * scale);
    }

    #[test]
    fn structure_maps_are_orthogonal_projections(
        (n1, n2) in dims(),
        raw in prop::collection::vec(-5.0f64..5.0, 49 * 2),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let x = Matrix::from_column_slice(n1, n2, &raw[..n1 * n2]);
        let y = Matrix::from_column_slice(n1, n2, &raw[49..49 + n1 * n2]);
        for s in structures(n1, n2) {
            let h = Vector::from_column_slice(&raw[..s.p()]);
            prop_assert!((s.fit(&s.apply(&h).unwrap()).unwrap() - &h).norm() <= 1e-13 * h.norm().max(1.0));
            let px = s.project(&x).unwrap();
            let py = s.project(&y).unwrap();
            prop_assert!((s.project(&px).unwrap() - &px).norm() <= 1e-12 * px.norm().max(1.0));
            prop_assert!(px.norm() <= x.norm() * (1.0 + 1e-12));
            let lhs = s.project(&(&x * a + &y * b)).unwrap();
            prop_assert!((lhs - (&px * a + &py * b)).norm() <= 1e-12 * (x.norm() + y.norm()).max(1.0) * 6.0);
            // the residual is orthogonal to the family
            prop_assert!((&x - &px).dot(&py).abs() <= 1e-10 * x.norm() * y.norm().max(1.0));
        }
    }

    #[test]
    fn operator_applies_to_vectorized_matrix(
        (n1, n2) in dims(),
        m in 1usize..10,
        seed in any::<u64>(),
        x in matrix(7, 7),
    ) {
        let a = make_gaussian_operator(m, n1, n2, seed);
        let v = vectorize(&x.view((0, 0), (n1, n2)).into_owned());
        let back = mat(&v, n1, n2).unwrap();
        prop_assert_eq!(apply_operator(&a, &back).unwrap(), &a * &v);
    }

    #[test]
    fn prewhitening_preserves_the_weighted_norm(
        m in 2usize..8,
        seed in any::<u64>(),
        g in matrix(8, 8),
        x in matrix(3, 2),
    ) {
        let (n1, n2) = (3, 2);
        let a = make_gaussian_operator(m, n1, n2, seed);
        let y = Vector::from_fn(m, |i, _| (i as f64 + 0.5).sin());
        let gm = g.view((0, 0), (m, m)).into_owned();
        let cov = &gm * gm.transpose() + Matrix::identity(m, m);
        let model = prewhiten(&a, &y, &NoiseSpec::Covariance(cov.clone()), n1, n2).unwrap();
        let resid = &y - &a * vectorize(&x);
        let weighted = resid.dot(&cov.clone().cholesky().unwrap().solve(&resid));
        let whitened = model.residual_norm(&x).powi(2);
        prop_assert!((weighted - whitened).abs() <= 1e-10 * weighted.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn estimates_are_self_consistent(seed in any::<u64>(), xi in 0.4f64..1.0) {
        let (n, r) = (6, 2);
        let m = (xi * 36.0).round() as usize;
        let (x, _) = gen_hankel_lowrank(n, n, r, seed).unwrap();
        let a = make_gaussian_operator(m, n, n, seed ^ 1);
        let y = &a * vectorize(&x);
        let model = MeasurementModel::new(a, y, n, n).unwrap();
        let opts = SolverOptions { k_max: 60, ..SolverOptions::default() };
        let hankel = LinearStructure::hankel(n, n);
        for est in [
            als_solve(&model, r, None, &opts, seed).unwrap(),
            ale_solve(&model, r, &hankel, &opts).unwrap(),
            adls_solve(&model, r, &hankel, &opts).unwrap(),
        ] {
            prop_assert!(est.iterations <= opts.k_max);
            prop_assert!(est.final_residual >= 0.0);
            prop_assert!((est.final_residual - model.residual_norm(&est.x_hat)).abs() <= 1e-9 * model.ybar().norm().max(1.0));
            prop_assert!((&est.x_hat - est.factorization.product()).norm() <= 1e-12 * est.x_hat.norm().max(1.0));
        }
    }

    #[test]
    fn lowrank_targets_have_the_requested_rank(seed in any::<u64>(), r in 1usize..4) {
        let x = gen_lowrank(7, 5, r, seed).unwrap();
        let mut sv: Vec<f64> = x.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        prop_assert!(sv[r] <= 1e-10 * sv[0]);
        prop_assert!(sv[r - 1] > 1e-8 * sv[0]);
    }
}

#[test]
fn unstructured_als_recovers_a_determined_problem() {
    let (n, r) = (5, 2);
    let x = gen_lowrank(n, n, r, 11).unwrap();
    let a = make_gaussian_operator(n * n, n, n, 12);
    let model = MeasurementModel::new(a.clone(), &a * vectorize(&x), n, n).unwrap();
    let est = als_solve(&model, r, None, &SolverOptions::default(), 0).unwrap();
    assert!(srer_db(&x, &est.x_hat).unwrap() >= 100.0);
}
