use ku_core::bounds::markov_bound_hermitian;
use ku_core::dense::spectral_norm;
use ku_core::oracle::{dense_update, markov_update_quadrature, sherman_morrison};
use ku_core::poles::{leja_order, quasi_optimal_poles};
use ku_core::{
    run_update, run_update_observed, sign_update, sylvester_dense, sylvester_solve_krylov,
    DenseMatrix, FunctionSpec, LowRankTerm, Pole, PolePlan, SignUpdateInput, SpectralWindow,
    Structure, SylvesterProblem, UpdateConfig, C64,
};

fn column(n: usize, k: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, 1, |i, _| {
        C64::new(
            1.0 + ((i * (3 + k)) % 7) as f64 * 0.3,
            ((i + k) % 3) as f64 * 0.5,
        )
    })
}

fn geometric(n: usize, lo: f64, ratio: f64) -> Vec<f64> {
    (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
}

fn rel(x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    spectral_norm(&(x - y)) / spectral_norm(y)
}

#[test]
fn hermitian_inv_sqrt_converges_within_bound() {
    let n = 60;
    let vals = geometric(n, 1e-2, 1.15);
    let a = DenseMatrix::real_diag(&vals);
    let b = column(n, 0).scale_real(0.1);
    let j = DenseMatrix::identity(1);
    let f = FunctionSpec::inv_sqrt();
    let window = SpectralWindow::interval(vals[0], vals[n - 1]).unwrap();
    let plan = leja_order(
        quasi_optimal_poles(&window, f.markov_support().unwrap(), 4)
            .unwrap()
            .poles(),
    )
    .unwrap()
    .with_repetition(ku_core::arnoldi::Repetition::Cyclic);
    let exact = markov_update_quadrature(&a, &b, &j, &f).unwrap();
    let term = LowRankTerm::hermitian(b.clone(), j);
    let config = UpdateConfig::new(40, 0.0).with_lag(2);
    let (state, report) = run_update_observed(&a, &term, &f, &plan, &config, &mut |s| {
        Some(spectral_norm(&(&s.approximation(n) - &exact)))
    })
    .unwrap();
    let errors = report.true_errors.unwrap();
    let bound = markov_bound_hermitian(&window, &plan, &f, errors.len(), 2048).unwrap();
    for (m, e) in errors.iter().enumerate() {
        assert!(
            *e <= bound.values[m + 1],
            "step {}: {e} > {}",
            m + 1,
            bound.values[m + 1]
        );
    }
    assert!(rel(&state.approximation(n), &exact) < 1e-11);
}

#[test]
fn general_exp_update_matches_dense() {
    let n = 40;
    let mut a = DenseMatrix::real_diag(&geometric(n, -2.0, 0.97));
    for i in 0..n - 1 {
        a[(i, i + 1)] = C64::new(0.3, 0.1);
    }
    let b = column(n, 1).hcat(&column(n, 2)).scale_real(0.05);
    let c = column(n, 3).hcat(&column(n, 4)).scale_real(0.05);
    let f = FunctionSpec::exp();
    let exact = dense_update(&a, &b.mul_adjoint(&c), &f, Structure::General).unwrap();
    let plan = PolePlan::cyclic(vec![Pole::Infinite]);
    let (state, report) = run_update(
        &a,
        &LowRankTerm::general(b, c),
        &f,
        &plan,
        &UpdateConfig::new(20, 1e-13),
    )
    .unwrap();
    assert!(report.converged);
    assert!(rel(&state.approximation(n), &exact) < 1e-11);
}

#[test]
fn one_step_at_pole_zero_reproduces_sherman_morrison() {
    let n = 30;
    let mut a = DenseMatrix::real_diag(&geometric(n, 1.0, 1.1));
    a[(0, n - 1)] = C64::new(0.5, -0.2);
    let (b, c) = (column(n, 0).scale_real(0.1), column(n, 5).scale_real(0.1));
    let exact = sherman_morrison(&a, &b, &c).unwrap();
    let plan = PolePlan::new(vec![Pole::real(0.0)]);
    let (state, _) = run_update(
        &a,
        &LowRankTerm::general(b, c),
        &FunctionSpec::inverse(),
        &plan,
        &UpdateConfig::new(1, 0.0).with_lag(1),
    )
    .unwrap();
    assert!(rel(&state.approximation(n), &exact) < 1e-13);
}

#[test]
fn sign_update_matches_dense() {
    let n = 40;
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            if i % 2 == 0 {
                0.1 + 0.02 * i as f64
            } else {
                -0.15 - 0.02 * i as f64
            }
        })
        .collect();
    let a = DenseMatrix::real_diag(&vals);
    let b = column(n, 2).scale_real(0.05);
    let j = DenseMatrix::identity(1);
    let exact = dense_update(
        &a,
        &b.mul_adjoint(&b),
        &FunctionSpec::sign(),
        Structure::Hermitian,
    )
    .unwrap();
    let plan = PolePlan::cyclic(vec![Pole::real(-0.1)]);
    let input = SignUpdateInput::new(a, b, j, plan).unwrap();
    let (state, report) = sign_update(&input, &UpdateConfig::new(n, 1e-12), &mut |_| None).unwrap();
    assert!(report.iterations <= n);
    assert!(spectral_norm(&(&state.approximation() - &exact)) < 1e-9);
}

#[test]
fn sylvester_krylov_matches_dense() {
    let (n1, n2) = (25, 20);
    let a1 = DenseMatrix::real_diag(&geometric(n1, 1.0, 1.1));
    let a2 = DenseMatrix::real_diag(&geometric(n2, -1.0, 1.12));
    let b1 = column(n1, 1);
    let c2 = column(n2, 2);
    let prob = SylvesterProblem::new(a1, a2, b1, c2).unwrap();
    let exact = sylvester_dense(&prob).unwrap();
    let plan = PolePlan::cyclic(vec![
        Pole::Infinite,
        Pole::Finite(C64::new(0.0, 4.0)),
        Pole::Finite(C64::new(0.0, -4.0)),
    ]);
    let (sol, report) = sylvester_solve_krylov(&prob, &plan, n1 + 1, 0.0).unwrap();
    assert!(report.converged);
    assert!(rel(&sol.dense(), &exact) < 1e-10);
}
