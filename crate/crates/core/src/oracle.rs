//! Brute-force reference implementations. Every entry point refuses
//! matrices larger than [`ORACLE_LIMIT`].

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::dense::{
    funm_small, inverse, markov_quadrature_update, shifted_factorize, solve, DenseMatrix,
    Structure, C64,
};
use crate::error::{Error, Result};
use crate::function::{FunctionSpec, PoleTerm};

pub const ORACLE_LIMIT: usize = 512;

fn guard(a: &DenseMatrix) -> Result<()> {
    if a.rows() > ORACLE_LIMIT || a.cols() > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            n: a.rows().max(a.cols()),
            limit: ORACLE_LIMIT,
        });
    }
    Ok(())
}

/// `f(A + D) - f(A)` by two dense matrix functions.
pub fn dense_update(
    a: &DenseMatrix,
    d: &DenseMatrix,
    f: &FunctionSpec,
    structure: Structure,
) -> Result<DenseMatrix> {
    guard(a)?;
    let fa = funm_small(a, f, structure)?;
    let fad = funm_small(&(a + d), f, structure)?;
    Ok(&fad - &fa)
}

/// `(A + b c^*)^{-1} - A^{-1} = -A^{-1} b c^* A^{-1} / (1 + c^* A^{-1} b)`.
pub fn sherman_morrison(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> Result<DenseMatrix> {
    guard(a)?;
    let lu = shifted_factorize(a, C64::zero())?;
    let x = lu.solve(b);
    let y = lu.solve_adjoint(c);
    let denom = C64::one() + c.adjoint_mul(&x)[(0, 0)];
    if denom.norm() <= 1e-14 * (1.0 + c.norm_fro() * x.norm_fro()) {
        return Err(Error::DenominatorZero);
    }
    Ok(x.mul_adjoint(&y).scale(-denom.inv()))
}

/// Numerator and denominator coefficients `alpha`, `beta` (ascending) of
/// `r = p / q`, with the Hankel matrices `H(alpha)`, `H(beta)`.
#[derive(Clone, Debug)]
pub struct HankelCoefficients {
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
    pub h_alpha: DenseMatrix,
    pub h_beta: DenseMatrix,
}

impl HankelCoefficients {
    pub fn new(alpha: Vec<C64>, beta: Vec<C64>) -> Result<Self> {
        if alpha.is_empty() || beta.iter().all(|z| z.is_zero()) {
            return Err(Error::InvalidArgument(
                "empty numerator or zero denominator".into(),
            ));
        }
        let m = (alpha.len() - 1).max(beta.len() - 1).max(1);
        let h_alpha = hankel(&alpha, m);
        let h_beta = hankel(&beta, m);
        Ok(Self {
            alpha,
            beta,
            h_alpha,
            h_beta,
        })
    }

    pub fn order(&self) -> usize {
        self.h_alpha.rows()
    }
}

/// `H[i, j] = c_{i+j+1}` (zero past the last coefficient).
fn hankel(c: &[C64], m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, m, |i, j| {
        c.get(i + j + 1).copied().unwrap_or_else(C64::zero)
    })
}

fn poly_matrix(a: &DenseMatrix, c: &[C64]) -> DenseMatrix {
    let n = a.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for ci in c.iter().rev() {
        out = &out.matmul(a) + &DenseMatrix::identity(n).scale(*ci);
    }
    out
}

/// Rank-`m` factors with `X Y^* = r(A + b c^*) - r(A)` built from the
/// Krylov matrices `[b, A b, ...]` and `[c, (A + b c^*)^* c, ...]`.
pub fn bvl_update(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    coeffs: &HankelCoefficients,
) -> Result<(DenseMatrix, DenseMatrix)> {
    guard(a)?;
    let n = a.rows();
    let m = coeffs.order();
    let mut k = DenseMatrix::zeros(n, m);
    let mut l = DenseMatrix::zeros(n, m);
    let apd_adj = (a + &b.mul_adjoint(c)).adjoint();
    let mut kc = b.clone();
    let mut lc = c.clone();
    for j in 0..m {
        k.set_submatrix(0, j, &kc);
        l.set_submatrix(0, j, &lc);
        kc = a.matmul(&kc);
        lc = apd_adj.matmul(&lc);
    }
    let qa = poly_matrix(a, &coeffs.beta);
    let pa = poly_matrix(a, &coeffs.alpha);
    let ra = solve(&qa, &pa)?;
    let x = solve(&qa, &k)?;
    let y_alpha = l.mul_adjoint(&coeffs.h_alpha);
    let y_beta = l.mul_adjoint(&coeffs.h_beta);
    let mmat = &DenseMatrix::identity(m) + &y_beta.adjoint_mul(&x);
    let minv = inverse(&mmat).map_err(|_| Error::MSingular)?;
    let inner = &ra + &x.mul_adjoint(&y_alpha);
    let y_star = &y_alpha.adjoint() - &minv.matmul(&y_beta.adjoint_mul(&inner));
    Ok((x, y_star.adjoint()))
}

/// `c I + sum_s sum_j r_{s,j} (A - xi_s I)^{-j}`.
pub fn rational_eval_pf(a: &DenseMatrix, terms: &[PoleTerm], constant: C64) -> Result<DenseMatrix> {
    guard(a)?;
    let n = a.rows();
    let mut out = DenseMatrix::identity(n).scale(constant);
    for t in terms {
        let lu = shifted_factorize(a, t.pole)?;
        let mut pw = DenseMatrix::identity(n);
        for r in &t.residues {
            pw = lu.solve(&pw);
            out = &out + &pw.scale(*r);
        }
    }
    Ok(out)
}

/// `f(A + B J B^*) - f(A)` for Hermitian `A` by resolvent quadrature (see
/// [`markov_quadrature_update`]); `NotMarkov` for functions without one.
pub fn markov_update_quadrature(
    a: &DenseMatrix,
    b: &DenseMatrix,
    j: &DenseMatrix,
    f: &FunctionSpec,
) -> Result<DenseMatrix> {
    guard(a)?;
    markov_quadrature_update(a, b, j, f).unwrap_or(Err(Error::NotMarkov))
}
