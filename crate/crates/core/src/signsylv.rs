//! Sign-function updates through the inverse square root of `A^2`, and
//! Sylvester equations `A1 Z - Z A2 + B1 C2^* = 0` by projection onto a pair
//! of rational Krylov spaces, plus a dense Schur-based Sylvester solver.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::arnoldi::{ArnoldiProcess, FactorizationCache, KrylovBasis, OperatorTag, PolePlan};
use crate::dense::{
    funm_small, hermitian_eigen, orthonormalize_block, qr_orthonormalize, schur, spectral_norm,
    DenseMatrix, Structure, C64,
};
use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::tol::TOL_SOLVE;
use crate::updater::{padded_difference, UpdateConfig, UpdateReport};

/// `sign(A + B J B^*) - sign(A)` for Hermitian `A` and `J`.
#[derive(Clone, Debug)]
pub struct SignUpdateInput {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub j: DenseMatrix,
    /// Poles for `A^2`, real and negative or infinite.
    pub plan: PolePlan,
}

impl SignUpdateInput {
    pub fn new(a: DenseMatrix, b: DenseMatrix, j: DenseMatrix, plan: PolePlan) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::Dimension {
                context: "sign update operator",
                expected: n,
                found: a.cols(),
            });
        }
        if b.rows() != n {
            return Err(Error::Dimension {
                context: "sign update B rows",
                expected: n,
                found: b.rows(),
            });
        }
        if j.rows() != b.cols() || j.cols() != b.cols() {
            return Err(Error::Dimension {
                context: "sign update J size",
                expected: b.cols(),
                found: j.rows(),
            });
        }
        Ok(Self { a, b, j, plan })
    }

    /// `A + B J B^*`
    pub fn perturbed(&self) -> DenseMatrix {
        (&self.a + &self.b.matmul(&self.j).mul_adjoint(&self.b)).hermitian_part()
    }
}

/// State after `m` steps of the sign update: the approximation is
/// `(A + D) U X U^* + B J f^*` with `f = U y`.
#[derive(Clone, Debug)]
pub struct SignUpdateState {
    basis: Option<KrylovBasis>,
    /// `(A + D) U`
    apd_u: DenseMatrix,
    bj: DenseMatrix,
    coupling: DenseMatrix,
    y: DenseMatrix,
    estimates: Vec<f64>,
}

impl SignUpdateState {
    pub fn basis(&self) -> Option<&KrylovBasis> {
        self.basis.as_ref()
    }

    /// `X_m(z^{-1/2})`
    pub fn coupling(&self) -> &DenseMatrix {
        &self.coupling
    }

    /// `f_m = U G^{-1/2} U^* B`
    pub fn f(&self) -> DenseMatrix {
        match &self.basis {
            Some(k) => k.basis().matmul(&self.y),
            None => DenseMatrix::zeros(self.bj.rows(), self.bj.cols()),
        }
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    /// Factors `(L, R)` with update `L R^*`: `L = [(A+D)U, BJ]`,
    /// `R = [U X^*, f]`.
    pub fn factors(&self) -> (DenseMatrix, DenseMatrix) {
        match &self.basis {
            Some(k) => {
                let left = self.apd_u.hcat(&self.bj);
                let right = k.basis().mul_adjoint(&self.coupling).hcat(&self.f());
                (left, right)
            }
            None => {
                let n = self.bj.rows();
                (DenseMatrix::zeros(n, 0), DenseMatrix::zeros(n, 0))
            }
        }
    }

    pub fn approximation(&self) -> DenseMatrix {
        let (l, r) = self.factors();
        if l.cols() == 0 {
            let n = self.bj.rows();
            return DenseMatrix::zeros(n, n);
        }
        l.mul_adjoint(&r)
    }
}

fn inv_sqrt_positive(g: &DenseMatrix) -> Result<DenseMatrix> {
    let (ev, _) = hermitian_eigen(g, false)?;
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if !(lo > 0.0) {
        return Err(Error::IndefiniteSquareWindow { ritz: lo });
    }
    funm_small(g, &FunctionSpec::inv_sqrt(), Structure::Hermitian)
}

/// Orthonormal basis of `span [B, AB]`, dropping directions of `AB`
/// already in `span B`.
fn seed_block(b: &DenseMatrix, ab: &DenseMatrix) -> Result<DenseMatrix> {
    let mut q = qr_orthonormalize(b)?;
    for j in 0..ab.cols() {
        if let Ok(col) = orthonormalize_block(Some(&q), &ab.columns(j..j + 1)) {
            q.push_columns(&col);
        }
    }
    Ok(q)
}

/// Runs the sign update. Stops when
/// `||A+D|| ||X_m - X_{m-d}|| + ||BJ|| ||y_m - y_{m-d}||` drops below
/// `config.tol`; `observer` values are collected as true errors.
pub fn sign_update(
    input: &SignUpdateInput,
    config: &UpdateConfig,
    observer: &mut dyn FnMut(&SignUpdateState) -> Option<f64>,
) -> Result<(SignUpdateState, UpdateReport)> {
    if config.d == 0 || config.m_max < config.d {
        return Err(Error::InvalidArgument("need m_max >= d >= 1".into()));
    }
    let a = &input.a;
    let (b, j) = (&input.b, &input.j);
    let n = a.rows();
    let bj = b.matmul(j);
    let apd = input.perturbed();
    let mut state = SignUpdateState {
        basis: None,
        apd_u: DenseMatrix::zeros(n, 0),
        bj: bj.clone(),
        coupling: DenseMatrix::zeros(0, 0),
        y: DenseMatrix::zeros(0, b.cols()),
        estimates: Vec::new(),
    };
    let mut true_errors = Vec::new();
    if b.max_abs() == 0.0 || j.max_abs() == 0.0 {
        state.estimates.push(0.0);
        true_errors.extend(observer(&state));
        let report = UpdateReport {
            final_rank: 0,
            iterations: 1,
            estimates: state.estimates.clone(),
            true_errors: (!true_errors.is_empty()).then_some(true_errors),
            converged: true,
            stagnation: false,
        };
        return Ok((state, report));
    }

    let ab = a.matmul(b);
    let jbbj = j.matmul(&b.adjoint_mul(b)).matmul(j);
    let norm_apd = spectral_norm(&apd);
    let norm_bj = spectral_norm(&bj);
    let seed = seed_block(b, &ab)?;
    let mut proc = ArnoldiProcess::new(a, OperatorTag::SquareA, &seed)?;
    let mut cache = FactorizationCache::new();
    let mut recent: VecDeque<(DenseMatrix, DenseMatrix)> = VecDeque::with_capacity(config.d + 1);
    let mut converged = false;
    for m in 0..config.m_max {
        let pole = input.plan.pole(m)?;
        let k = proc.step(&mut cache, pole)?.clone();
        let u = k.basis();
        let old = state.apd_u.cols();
        let fresh = u.columns(old..u.cols());
        state.apd_u.push_columns(&apd.matmul(&fresh));

        let g = k.compression().hermitian_part();
        let p = u.adjoint_mul(b);
        let q = u.adjoint_mul(&ab);
        let pj = p.matmul(j);
        let dt = &(&q.matmul(j).mul_adjoint(&p) + &pj.mul_adjoint(&q))
            + &p.matmul(&jbbj).mul_adjoint(&p);
        let gi = inv_sqrt_positive(&g)?;
        let gp = inv_sqrt_positive(&(&g + &dt).hermitian_part())?;
        let x = (&gp - &gi).hermitian_part();
        let y = gi.matmul(&p);

        let est = if recent.len() < config.d {
            norm_apd * spectral_norm(&x) + norm_bj * spectral_norm(&y)
        } else {
            let (xo, yo) = &recent[recent.len() - config.d];
            let dy = &y - &yo.padded(y.rows(), y.cols());
            norm_apd * padded_difference(&x, xo) + norm_bj * spectral_norm(&dy)
        };
        if recent.len() == config.d {
            recent.pop_front();
        }
        recent.push_back((x.clone(), y.clone()));
        state.coupling = x;
        state.y = y;
        state.basis = Some(k);
        state.estimates.push(est);
        true_errors.extend(observer(&state));
        let exhausted = state.basis.as_ref().is_some_and(|k| k.dim() == n);
        if (est <= config.tol && state.estimates.len() > config.d) || exhausted {
            converged = true;
            break;
        }
    }
    let report = UpdateReport {
        final_rank: state.apd_u.cols() + b.cols(),
        iterations: state.estimates.len(),
        estimates: state.estimates.clone(),
        true_errors: (!true_errors.is_empty()).then_some(true_errors),
        converged,
        stagnation: false,
    };
    Ok((state, report))
}

/// `A1 Z - Z A2 + B1 C2^* = 0`
#[derive(Clone, Debug)]
pub struct SylvesterProblem {
    pub a1: DenseMatrix,
    pub a2: DenseMatrix,
    pub b1: DenseMatrix,
    pub c2: DenseMatrix,
}

impl SylvesterProblem {
    pub fn new(a1: DenseMatrix, a2: DenseMatrix, b1: DenseMatrix, c2: DenseMatrix) -> Result<Self> {
        if !a1.is_square() {
            return Err(Error::Dimension {
                context: "Sylvester A1",
                expected: a1.rows(),
                found: a1.cols(),
            });
        }
        if !a2.is_square() {
            return Err(Error::Dimension {
                context: "Sylvester A2",
                expected: a2.rows(),
                found: a2.cols(),
            });
        }
        if b1.rows() != a1.rows() {
            return Err(Error::Dimension {
                context: "Sylvester B1 rows",
                expected: a1.rows(),
                found: b1.rows(),
            });
        }
        if c2.rows() != a2.rows() {
            return Err(Error::Dimension {
                context: "Sylvester C2 rows",
                expected: a2.rows(),
                found: c2.rows(),
            });
        }
        if c2.cols() != b1.cols() {
            return Err(Error::Dimension {
                context: "Sylvester C2 columns",
                expected: b1.cols(),
                found: c2.cols(),
            });
        }
        Ok(Self { a1, a2, b1, c2 })
    }

    pub fn residual(&self, z: &DenseMatrix) -> DenseMatrix {
        &(&self.a1.matmul(z) - &z.matmul(&self.a2)) + &self.b1.mul_adjoint(&self.c2)
    }
}

/// Solves `T1 Y - Y T2 = F` for upper triangular `T1`, `T2`.
fn triangular_sylvester(t1: &DenseMatrix, t2: &DenseMatrix, f: &DenseMatrix) -> DenseMatrix {
    let (p, q) = (t1.rows(), t2.rows());
    let mut y = DenseMatrix::zeros(p, q);
    for col in 0..q {
        let mut rhs: Vec<C64> = f.col(col).to_vec();
        for k in 0..col {
            let s = t2[(k, col)];
            if s != C64::new(0.0, 0.0) {
                for (r, yk) in rhs.iter_mut().zip(y.col(k)) {
                    *r += yk * s;
                }
            }
        }
        let mu = t2[(col, col)];
        for i in (0..p).rev() {
            let mut acc = rhs[i];
            for k in i + 1..p {
                acc -= t1[(i, k)] * rhs[k];
            }
            rhs[i] = acc / (t1[(i, i)] - mu);
        }
        y.col_mut(col).copy_from_slice(&rhs);
    }
    y
}

/// Smallest distance between the Schur diagonals, relative to their scale.
fn separation(t1: &DenseMatrix, t2: &DenseMatrix) -> (f64, f64) {
    let mut gap = f64::INFINITY;
    let mut scale: f64 = 0.0;
    for i in 0..t1.rows() {
        scale = scale.max(t1[(i, i)].norm());
        for j in 0..t2.rows() {
            gap = gap.min((t1[(i, i)] - t2[(j, j)]).norm());
        }
    }
    for j in 0..t2.rows() {
        scale = scale.max(t2[(j, j)].norm());
    }
    (gap, scale.max(f64::MIN_POSITIVE))
}

/// Solves `A1 Z - Z A2 = F` by complex Schur forms of both coefficients.
fn solve_schur(
    a1: &DenseMatrix,
    a2: &DenseMatrix,
    f: &DenseMatrix,
    err: fn(f64) -> Error,
) -> Result<DenseMatrix> {
    let s1 = schur(a1)?;
    let s2 = schur(a2)?;
    let (gap, scale) = separation(&s1.t, &s2.t);
    if gap <= TOL_SOLVE * scale {
        return Err(err(gap));
    }
    let rhs = s1.q.adjoint_mul(f).matmul(&s2.q);
    let y = triangular_sylvester(&s1.t, &s2.t, &rhs);
    Ok(s1.q.matmul(&y).mul_adjoint(&s2.q))
}

/// Dense solution of the Sylvester equation.
pub fn sylvester_dense(prob: &SylvesterProblem) -> Result<DenseMatrix> {
    let rhs = prob.b1.mul_adjoint(&prob.c2).scale_real(-1.0);
    solve_schur(&prob.a1, &prob.a2, &rhs, |gap| Error::SpectraIntersect {
        gap,
    })
}

/// Low-rank solution `Z = left right^*`.
#[derive(Clone, Debug)]
pub struct SylvesterSolution {
    pub left: DenseMatrix,
    pub right: DenseMatrix,
    /// Compressed solution `Z~` in the bases `U1`, `V2`.
    pub core: DenseMatrix,
}

impl SylvesterSolution {
    pub fn dense(&self) -> DenseMatrix {
        self.left.mul_adjoint(&self.right)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SylvesterReport {
    pub iterations: usize,
    /// `||Z~_m - [Z~_{m-1} 0; 0 0]|| / ||Z~_m||`
    pub estimates: Vec<f64>,
    /// Frobenius norm of the full residual after each step.
    pub residuals: Vec<f64>,
    /// `||U1^* R V2||_F` after each step.
    pub galerkin: Vec<f64>,
    pub converged: bool,
}

/// Galerkin projection onto `q(A1)^{-1} K(A1, B1)` and
/// `conj(q)(A2^*)^{-1} K(A2^*, C2)`. A side whose basis spans the whole
/// space stops growing. Stops when the relative change of `Z~` falls below
/// `tol`, or when both sides are complete.
pub fn sylvester_solve_krylov(
    prob: &SylvesterProblem,
    plan: &PolePlan,
    m_max: usize,
    tol: f64,
) -> Result<(SylvesterSolution, SylvesterReport)> {
    let (n1, n2) = (prob.a1.rows(), prob.a2.rows());
    let bc = prob.b1.mul_adjoint(&prob.c2);
    let mut left = ArnoldiProcess::new(&prob.a1, OperatorTag::A, &prob.b1)?;
    let mut right = ArnoldiProcess::new(&prob.a2, OperatorTag::AdjointA, &prob.c2)?;
    let (mut cache1, mut cache2) = (FactorizationCache::new(), FactorizationCache::new());
    let mut report = SylvesterReport {
        iterations: 0,
        estimates: Vec::new(),
        residuals: Vec::new(),
        galerkin: Vec::new(),
        converged: false,
    };
    if prob.b1.max_abs() == 0.0 || prob.c2.max_abs() == 0.0 {
        report.iterations = 1;
        report.estimates.push(0.0);
        report.residuals.push(0.0);
        report.galerkin.push(0.0);
        report.converged = true;
        let sol = SylvesterSolution {
            left: DenseMatrix::zeros(n1, 0),
            right: DenseMatrix::zeros(n2, 0),
            core: DenseMatrix::zeros(0, 0),
        };
        return Ok((sol, report));
    }
    let mut previous: Option<DenseMatrix> = None;
    let mut solution = None;
    for m in 0..m_max {
        let pole = plan.pole(m)?;
        let grow_left = left.basis().is_none_or(|k| k.dim() < n1);
        let grow_right = right.basis().is_none_or(|k| k.dim() < n2);
        if !grow_left && !grow_right {
            report.converged = true;
            break;
        }
        if grow_left {
            left.step(&mut cache1, pole)?;
        }
        if grow_right {
            right.step(&mut cache2, pole)?;
        }
        let (ku, kv) = (
            left.basis().expect("left basis"),
            right.basis().expect("right basis"),
        );
        let (u, v) = (ku.basis(), kv.basis());
        let g = ku.compression();
        let h_adj = kv.compression().adjoint();
        let rhs = u
            .adjoint_mul(&prob.b1)
            .mul_adjoint(&v.adjoint_mul(&prob.c2))
            .scale_real(-1.0);
        let core = solve_schur(g, &h_adj, &rhs, |_| Error::CompressedNotSolvable)?;
        let est = match &previous {
            Some(p) => padded_difference(&core, p) / spectral_norm(&core).max(f64::MIN_POSITIVE),
            None => 1.0,
        };
        // R = (A1 U) Z~ V^* - U Z~ (A2^* V)^* + B1 C2^*
        let r = &(&ku.op_basis().matmul(&core).mul_adjoint(v)
            - &u.matmul(&core).mul_adjoint(kv.op_basis()))
            + &bc;
        report.residuals.push(r.norm_fro());
        report.galerkin.push(u.adjoint_mul(&r).matmul(v).norm_fro());
        report.estimates.push(est);
        report.iterations = m + 1;
        solution = Some(SylvesterSolution {
            left: u.matmul(&core),
            right: v.clone(),
            core: core.clone(),
        });
        previous = Some(core);
        if est <= tol {
            report.converged = true;
            break;
        }
    }
    let sol = solution
        .ok_or_else(|| Error::InvalidArgument("Sylvester solve needs m_max >= 1".into()))?;
    Ok((sol, report))
}
