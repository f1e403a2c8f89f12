//! Projection approximation of `f(A + D) - f(A)` for a low-rank `D`.
//!
//! Two bases are grown side by side, `U` for `(A, B)` and `V` for
//! `(A^*, C)`, and the small coupling matrix `X_m(f)` is read off the
//! off-diagonal block of `f` applied to a block triangular compression. For
//! Hermitian problems `D = B J B^*` a single basis suffices and
//! `X_m(f) = f(G + U^* D U) - f(G)`.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::arnoldi::{ArnoldiProcess, FactorizationCache, KrylovBasis, OperatorTag, PolePlan};
use crate::dense::{
    funm_block_triangular, funm_small, markov_quadrature_update, spectral_norm, DenseMatrix,
    Structure,
};
use crate::error::{Error, Result};
use crate::function::FunctionSpec;

/// The low-rank perturbation `D`.
#[derive(Clone, Debug)]
pub enum LowRankTerm {
    /// `D = B C^*`
    General { b: DenseMatrix, c: DenseMatrix },
    /// `D = B J B^*` with `A` and `J` Hermitian.
    Hermitian { b: DenseMatrix, j: DenseMatrix },
}

impl LowRankTerm {
    pub fn general(b: DenseMatrix, c: DenseMatrix) -> Self {
        LowRankTerm::General { b, c }
    }

    pub fn hermitian(b: DenseMatrix, j: DenseMatrix) -> Self {
        LowRankTerm::Hermitian { b, j }
    }

    pub fn b(&self) -> &DenseMatrix {
        match self {
            LowRankTerm::General { b, .. } | LowRankTerm::Hermitian { b, .. } => b,
        }
    }

    /// `C` with `D = B C^*`; equals `B J^*` in the Hermitian case.
    pub fn c(&self) -> DenseMatrix {
        match self {
            LowRankTerm::General { c, .. } => c.clone(),
            LowRankTerm::Hermitian { b, j } => b.mul_adjoint(j),
        }
    }

    pub fn dense(&self) -> DenseMatrix {
        self.b().mul_adjoint(&self.c())
    }

    pub fn is_hermitian(&self) -> bool {
        matches!(self, LowRankTerm::Hermitian { .. })
    }

    fn is_zero(&self) -> bool {
        match self {
            LowRankTerm::General { b, c } => b.max_abs() == 0.0 || c.max_abs() == 0.0,
            LowRankTerm::Hermitian { b, j } => b.max_abs() == 0.0 || j.max_abs() == 0.0,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let (b, other, rows) = match self {
            LowRankTerm::General { b, c } => (b, c, c.rows()),
            LowRankTerm::Hermitian { b, j } => (b, j, n),
        };
        if b.rows() != n || rows != n {
            return Err(Error::Dimension {
                context: "low-rank factor rows",
                expected: n,
                found: if b.rows() != n { b.rows() } else { rows },
            });
        }
        let width = match self {
            LowRankTerm::General { .. } => other.cols(),
            LowRankTerm::Hermitian { j, .. } => {
                if !j.is_square() {
                    return Err(Error::Dimension {
                        context: "J must be square",
                        expected: j.rows(),
                        found: j.cols(),
                    });
                }
                j.rows()
            }
        };
        if width != b.cols() {
            return Err(Error::Dimension {
                context: "low-rank factor columns",
                expected: b.cols(),
                found: width,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct UpdateConfig {
    pub m_max: usize,
    /// Absolute tolerance on the difference estimate.
    pub tol: f64,
    /// Lag of the difference estimator.
    pub d: usize,
}

impl UpdateConfig {
    pub fn new(m_max: usize, tol: f64) -> Self {
        Self { m_max, tol, d: 2 }
    }

    pub fn with_lag(mut self, d: usize) -> Self {
        self.d = d;
        self
    }
}

/// Evolving approximation `U X V^*` (with `V = U` in Hermitian mode).
#[derive(Clone, Debug)]
pub struct UpdateState {
    left: Option<KrylovBasis>,
    right: Option<KrylovBasis>,
    coupling: DenseMatrix,
    recent: VecDeque<Option<DenseMatrix>>,
    estimate_history: Vec<f64>,
    steps: usize,
    hermitian_mode: bool,
}

impl UpdateState {
    fn empty(hermitian_mode: bool, lag: usize) -> Self {
        Self {
            left: None,
            right: None,
            coupling: DenseMatrix::zeros(0, 0),
            recent: VecDeque::with_capacity(lag + 1),
            estimate_history: Vec::new(),
            steps: 0,
            hermitian_mode,
        }
    }

    pub fn left(&self) -> Option<&KrylovBasis> {
        self.left.as_ref()
    }

    /// In Hermitian mode this is the left basis.
    pub fn right(&self) -> Option<&KrylovBasis> {
        if self.hermitian_mode {
            self.left.as_ref()
        } else {
            self.right.as_ref()
        }
    }

    pub fn coupling(&self) -> &DenseMatrix {
        &self.coupling
    }

    pub fn estimate_history(&self) -> &[f64] {
        &self.estimate_history
    }

    pub fn hermitian_mode(&self) -> bool {
        self.hermitian_mode
    }

    /// Rank bound of the approximation (the coupling size).
    pub fn rank(&self) -> usize {
        self.coupling.rows().max(self.coupling.cols())
    }

    /// `(U, X, V)`, or `None` when no basis was built (zero update).
    pub fn factors(&self) -> Option<(&DenseMatrix, &DenseMatrix, &DenseMatrix)> {
        let u = self.left.as_ref()?.basis();
        let v = self.right()?.basis();
        Some((u, &self.coupling, v))
    }

    /// Dense `U X V^*` of size `n x n`.
    pub fn approximation(&self, n: usize) -> DenseMatrix {
        match self.factors() {
            Some((u, x, v)) => u.matmul(x).mul_adjoint(v),
            None => DenseMatrix::zeros(n, n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpdateReport {
    pub final_rank: usize,
    pub iterations: usize,
    pub estimates: Vec<f64>,
    pub true_errors: Option<Vec<f64>>,
    pub converged: bool,
    /// Set when three consecutive estimates each dropped by less than 5%.
    pub stagnation: bool,
}

/// `X_m(f)`: the (1,2) block of `f([[G, (U^*B)(V^*C)^*], [0, H^* + (V^*B)(V^*C)^*]])`.
pub fn project_update(
    left: &KrylovBasis,
    right: &KrylovBasis,
    b: &DenseMatrix,
    c: &DenseMatrix,
    f: &FunctionSpec,
) -> Result<DenseMatrix> {
    let u = left.basis();
    let v = right.basis();
    let ub = u.adjoint_mul(b);
    let vb = v.adjoint_mul(b);
    let vc = v.adjoint_mul(c);
    let a12 = ub.mul_adjoint(&vc);
    let h = match right.operator() {
        OperatorTag::AdjointA => right.compression().adjoint(),
        _ => right.compression().clone(),
    };
    let a22 = &h + &vb.mul_adjoint(&vc);
    let blocks = funm_block_triangular(
        left.compression(),
        &a12,
        &a22,
        f,
        Structure::General,
        Structure::General,
    )?;
    Ok(blocks.f12)
}

/// `X_m(f) = f(G + U^* B J B^* U) - f(G)` for a Hermitian problem.
pub fn update_hermitian(
    left: &KrylovBasis,
    b: &DenseMatrix,
    j: &DenseMatrix,
    f: &FunctionSpec,
) -> Result<DenseMatrix> {
    let g = left.compression().hermitian_part();
    if j.max_abs() == 0.0 {
        return Ok(DenseMatrix::zeros(g.rows(), g.cols()));
    }
    let ub = left.basis().adjoint_mul(b);
    // falls through to the dense difference when either matrix leaves the domain
    if let Some(Ok(x)) = markov_quadrature_update(&g, &ub, j, f) {
        return Ok(x);
    }
    let m = (&g + &ub.matmul(j).mul_adjoint(&ub)).hermitian_part();
    let fm = funm_small(&m, f, Structure::Hermitian)?;
    let fg = funm_small(&g, f, Structure::Hermitian)?;
    Ok(&fm - &fg)
}

/// `|| X_m - [X_{m-d} 0; 0 0] ||_2` from the two couplings.
pub fn padded_difference(newer: &DenseMatrix, older: &DenseMatrix) -> f64 {
    let padded = older.padded(newer.rows(), newer.cols());
    spectral_norm(&(newer - &padded))
}

/// Difference estimate of the latest step against the step `d` before it.
/// Steps before the first count as a zero coupling. `None` when either
/// coupling is unavailable (failed step, or older than the retained window).
pub fn estimate_error(state: &UpdateState, d: usize) -> Option<f64> {
    let newest = state.recent.back()?.as_ref()?;
    if state.steps <= d {
        return Some(spectral_norm(newest));
    }
    let len = state.recent.len();
    if d >= len {
        return None;
    }
    let older = state.recent[len - 1 - d].as_ref()?;
    Some(padded_difference(newest, older))
}

/// Grows the bases step by step until the difference estimate falls below
/// `config.tol` or `config.m_max` steps were taken.
pub fn run_update(
    a: &DenseMatrix,
    d: &LowRankTerm,
    f: &FunctionSpec,
    plan: &PolePlan,
    config: &UpdateConfig,
) -> Result<(UpdateState, UpdateReport)> {
    run_update_observed(a, d, f, plan, config, &mut |_: &UpdateState| None)
}

/// [`run_update`] with an observer called after every step; values it
/// returns are collected as true errors.
pub fn run_update_observed(
    a: &DenseMatrix,
    d: &LowRankTerm,
    f: &FunctionSpec,
    plan: &PolePlan,
    config: &UpdateConfig,
    observer: &mut dyn FnMut(&UpdateState) -> Option<f64>,
) -> Result<(UpdateState, UpdateReport)> {
    if !a.is_square() {
        return Err(Error::Dimension {
            context: "run_update operator",
            expected: a.rows(),
            found: a.cols(),
        });
    }
    if config.d == 0 || config.m_max < config.d {
        return Err(Error::InvalidArgument("need m_max >= d >= 1".into()));
    }
    let n = a.rows();
    d.validate(n)?;
    let hermitian = d.is_hermitian();
    let mut state = UpdateState::empty(hermitian, config.d);
    let mut true_errors = Vec::new();

    if d.is_zero() {
        state.estimate_history.push(0.0);
        if let Some(e) = observer(&state) {
            true_errors.push(e);
        }
        let report = UpdateReport {
            final_rank: 0,
            iterations: 1,
            estimates: state.estimate_history.clone(),
            true_errors: (!true_errors.is_empty()).then_some(true_errors),
            converged: true,
            stagnation: false,
        };
        return Ok((state, report));
    }

    let b = d.b();
    let c = d.c();
    let mut cache = FactorizationCache::new();
    let mut left = ArnoldiProcess::new(a, OperatorTag::A, b)?;
    let mut right = if hermitian {
        None
    } else {
        Some(ArnoldiProcess::new(a, OperatorTag::AdjointA, &c)?)
    };
    let mut converged = false;
    let mut failed_last = false;
    let mut last_good: Option<DenseMatrix> = None;
    for m in 0..config.m_max {
        let pole = plan.pole(m)?;
        let lb = left.step(&mut cache, pole)?.clone();
        let rb = match right.as_mut() {
            Some(r) => Some(r.step(&mut cache, pole)?.clone()),
            None => None,
        };
        let x = match (&d, &rb) {
            (LowRankTerm::Hermitian { b, j }, _) => update_hermitian(&lb, b, j, f),
            (LowRankTerm::General { b, c }, Some(rb)) => project_update(&lb, rb, b, c, f),
            (LowRankTerm::General { .. }, None) => {
                unreachable!("right basis exists in general mode")
            }
        };
        let x = match x {
            Ok(x) => {
                failed_last = false;
                Some(x)
            }
            Err(
                e @ (Error::SingularityOnSpectrum { .. } | Error::IllConditionedEigenbasis { .. }),
            ) => {
                if failed_last {
                    return Err(e);
                }
                failed_last = true;
                None
            }
            Err(e) => return Err(e),
        };
        let (rows, cols) = (lb.dim(), rb.as_ref().map_or(lb.dim(), |r| r.dim()));
        let exhausted = rows == n && cols == n && x.is_some();
        if let Some(x) = &x {
            last_good = Some(x.clone());
        }
        state.coupling = match &x {
            Some(x) => x.clone(),
            None => last_good
                .as_ref()
                .map_or_else(|| DenseMatrix::zeros(rows, cols), |g| g.padded(rows, cols)),
        };
        state.left = Some(lb);
        state.right = rb;
        if state.recent.len() == config.d + 1 {
            state.recent.pop_front();
        }
        state.recent.push_back(x);
        state.steps += 1;
        let est = estimate_error(&state, config.d).unwrap_or(f64::INFINITY);
        state.estimate_history.push(est);
        if let Some(e) = observer(&state) {
            true_errors.push(e);
        }
        // a basis spanning C^n makes the projection exact
        if (est <= config.tol && state.steps > config.d) || exhausted {
            converged = true;
            break;
        }
    }
    let report = UpdateReport {
        final_rank: state.rank(),
        iterations: state.estimate_history.len(),
        estimates: state.estimate_history.clone(),
        true_errors: (!true_errors.is_empty()).then_some(true_errors),
        converged,
        stagnation: stagnated(&state.estimate_history),
    };
    Ok((state, report))
}

fn stagnated(est: &[f64]) -> bool {
    est.windows(4).any(|w| {
        w.iter().all(|e| e.is_finite() && *e > 0.0) && w.windows(2).all(|p| p[1] > 0.95 * p[0])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arnoldi::{adjoint_basis, build_basis, Pole};
    use crate::dense::{inverse, C64};
    use crate::testutil::{rand_hermitian, rand_matrix, rng};
    use alloc::vec;
    use num_traits::One;

    fn inf() -> PolePlan {
        PolePlan::cyclic(vec![Pole::Infinite])
    }

    #[test]
    fn stops_once_the_space_is_exhausted() {
        let mut r = rng(41);
        let a = rand_matrix(&mut r, 6, 6);
        let d = LowRankTerm::general(rand_matrix(&mut r, 6, 2), rand_matrix(&mut r, 6, 2));
        let f = FunctionSpec::exp();
        let (state, report) = run_update(&a, &d, &f, &inf(), &UpdateConfig::new(10, 0.0)).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 3);
        let exact =
            crate::oracle::dense_update(&a, &d.dense(), &f, crate::dense::Structure::General)
                .unwrap();
        assert!(spectral_norm(&(&state.approximation(6) - &exact)) < 1e-12 * spectral_norm(&exact));
    }

    #[test]
    fn constant_and_identity() {
        let mut r = rng(61);
        let a = rand_matrix(&mut r, 12, 12);
        let b = rand_matrix(&mut r, 12, 1);
        let c = rand_matrix(&mut r, 12, 1);
        let plan = PolePlan::new(vec![Pole::real(-30.0), Pole::Infinite]);
        let u = build_basis(&a, &b, &plan, 2).unwrap();
        let v = adjoint_basis(&a, &c, &plan, 2).unwrap();
        let x = project_update(&u, &v, &b, &c, &FunctionSpec::constant(C64::one())).unwrap();
        assert!(x.max_abs() < 1e-12);
        let x = project_update(&u, &v, &b, &c, &FunctionSpec::identity()).unwrap();
        let want = u
            .basis()
            .adjoint_mul(&b)
            .mul_adjoint(&v.basis().adjoint_mul(&c));
        assert!((&x - &want).max_abs() < 1e-12);
    }

    #[test]
    fn resolvent_one_step() {
        let mut r = rng(62);
        let n = 30;
        let a = rand_matrix(&mut r, n, n);
        let b = rand_matrix(&mut r, n, 1);
        let c = rand_matrix(&mut r, n, 1);
        let xi = C64::new(9.0, 1.0);
        let plan = PolePlan::new(vec![Pole::Finite(xi)]);
        let u = build_basis(&a, &b, &plan, 1).unwrap();
        let v = adjoint_basis(&a, &c, &plan, 1).unwrap();
        let pf = crate::function::RationalFunction::from_partial_fractions(
            vec![],
            vec![crate::function::PoleTerm {
                pole: xi,
                residues: vec![C64::one()],
            }],
        );
        let x = project_update(&u, &v, &b, &c, &FunctionSpec::rational(pf)).unwrap();
        let approx = u.basis().matmul(&x).mul_adjoint(v.basis());
        let apd = &a + &b.mul_adjoint(&c);
        let want = &inverse(&apd.shifted(xi)).unwrap() - &inverse(&a.shifted(xi)).unwrap();
        assert!((&approx - &want).norm_fro() <= 1e-10 * want.norm_fro());
    }

    #[test]
    fn hermitian_hand_case() {
        let a = DenseMatrix::real_diag(&[1.0, 2.0]);
        let b = DenseMatrix::unit(2, 0);
        let j = DenseMatrix::real_diag(&[1.0]);
        let u = build_basis(&a, &b, &inf(), 1).unwrap();
        let sq = FunctionSpec::polynomial(&[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::one()]);
        let x = update_hermitian(&u, &b, &j, &sq).unwrap();
        assert!((x[(0, 0)].re - 3.0).abs() < 1e-14);
        let x0 = update_hermitian(&u, &b, &DenseMatrix::zeros(1, 1), &sq).unwrap();
        assert_eq!(x0.max_abs(), 0.0);
    }

    #[test]
    fn hermitian_shortcut_matches_projection() {
        let mut r = rng(63);
        let a = rand_hermitian(&mut r, 40).shifted(C64::new(-12.0, 0.0));
        let b = rand_matrix(&mut r, 40, 2);
        let j = rand_hermitian(&mut r, 2);
        let plan = PolePlan::new(vec![Pole::real(-1.0), Pole::Infinite, Pole::real(-4.0)]);
        let u = build_basis(&a, &b, &plan, 3).unwrap();
        let v = adjoint_basis(&a, &b.mul_adjoint(&j), &plan, 3).unwrap();
        let f = FunctionSpec::exp();
        let xh = update_hermitian(&u, &b, &j, &f).unwrap();
        let xp = project_update(&u, &v, &b, &b.mul_adjoint(&j), &f).unwrap();
        let dh = u.basis().matmul(&xh).mul_adjoint(u.basis());
        let dp = u.basis().matmul(&xp).mul_adjoint(v.basis());
        assert!((&dh - &dp).norm_fro() <= 1e-10 * dh.norm_fro());
    }

    #[test]
    fn zero_update_converges_immediately() {
        let a = DenseMatrix::real_diag(&[1.0, 2.0, 3.0]);
        let d = LowRankTerm::general(DenseMatrix::zeros(3, 1), DenseMatrix::unit(3, 0));
        let (state, rep) = run_update(
            &a,
            &d,
            &FunctionSpec::exp(),
            &inf(),
            &UpdateConfig::new(5, 1e-10),
        )
        .unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.estimates, vec![0.0]);
        assert_eq!(state.approximation(3).max_abs(), 0.0);
    }

    #[test]
    fn estimator_equals_dense_difference() {
        let mut r = rng(64);
        let n = 25;
        let a = rand_matrix(&mut r, n, n).scale_real(0.3);
        let d = LowRankTerm::general(rand_matrix(&mut r, n, 1), rand_matrix(&mut r, n, 1));
        let f = FunctionSpec::exp();
        let cfg = UpdateConfig::new(3, 0.0).with_lag(1);
        let (s2, _) =
            run_update(&a, &d, &f, &inf(), &UpdateConfig::new(2, 0.0).with_lag(1)).unwrap();
        let (s3, rep) = run_update(&a, &d, &f, &inf(), &cfg).unwrap();
        let diff = &s3.approximation(n) - &s2.approximation(n);
        let dense = spectral_norm(&diff);
        let est = *rep.estimates.last().unwrap();
        assert!((dense - est).abs() <= 1e-12 * dense.max(1.0));
        assert_eq!(estimate_error(&s3, 1), Some(est));
        assert_eq!(rep.estimates.len(), rep.iterations);
    }

    #[test]
    fn stagnation_detection() {
        assert!(stagnated(&[1.0, 0.99, 0.98, 0.97]));
        assert!(!stagnated(&[1.0, 0.5, 0.25, 0.1]));
        assert!(!stagnated(&[1.0, 0.99, 0.98]));
    }
}
