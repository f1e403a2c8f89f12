//! Updates of fractional inverse powers without forming two matrix functions.

use super::{hermitian_eigen, inverse, DenseMatrix};
use crate::error::{Error, Result};
use crate::function::{FunctionKind, FunctionSpec};

const QUADRATURE_STEP: f64 = 0.2;
// tails below exp(-38) relative are dropped
const QUADRATURE_TAIL: f64 = 38.0;

/// `(A + B J B^*)^{-gamma} - A^{-gamma}` for Hermitian positive definite `A`
/// and `A + B J B^*`, `0 < gamma < 1`.
///
/// Uses `z^{-gamma} = sin(pi gamma)/pi * int exp((1 - gamma) x) / (z + exp(x)) dx`
/// with the Woodbury form of the resolvent difference under the integral,
/// evaluated in the eigenbasis of `A` by the trapezoid rule. No difference of
/// two large matrix functions is formed, so small updates keep their
/// relative accuracy.
pub fn power_update(
    a: &DenseMatrix,
    b: &DenseMatrix,
    j: &DenseMatrix,
    gamma: f64,
) -> Result<DenseMatrix> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "exponent {gamma} outside (0, 1)"
        )));
    }
    let scale = (core::f64::consts::PI * gamma).sin() / core::f64::consts::PI;
    quadrature_update(
        a,
        b,
        j,
        0.0,
        |lo, hi| {
            (
                lo.ln() - QUADRATURE_TAIL / (1.0 - gamma),
                hi.ln() + QUADRATURE_TAIL / (1.0 + gamma),
            )
        },
        |x| (x.exp(), scale * ((1.0 - gamma) * x).exp()),
    )
}

/// `f(A + B J B^*) - f(A)` for `f(z) = log(1 + z) / z`, spectra of both
/// matrices in `(-1, inf)`; same scheme as [`power_update`] with
/// `f(z) = int e^x / ((1 + e^x)(z + 1 + e^x)) dx`.
pub fn log1p_over_z_update(
    a: &DenseMatrix,
    b: &DenseMatrix,
    j: &DenseMatrix,
) -> Result<DenseMatrix> {
    quadrature_update(
        a,
        b,
        j,
        -1.0,
        |lo, hi| {
            (
                (1.0 + lo).ln() - QUADRATURE_TAIL,
                (1.0 + hi).ln() + QUADRATURE_TAIL,
            )
        },
        |x| {
            let e = x.exp();
            (1.0 + e, e / (1.0 + e))
        },
    )
}

/// Quadrature form of `f(A + B J B^*) - f(A)` when `f` has one: inverse
/// square root, `z^{-gamma}` with `0 < gamma < 1`, and `log(1 + z) / z`.
pub fn markov_quadrature_update(
    a: &DenseMatrix,
    b: &DenseMatrix,
    j: &DenseMatrix,
    f: &FunctionSpec,
) -> Option<Result<DenseMatrix>> {
    match f.kind() {
        FunctionKind::InvSqrt => Some(power_update(a, b, j, 0.5)),
        FunctionKind::InvPower(g) if *g > 0.0 && *g < 1.0 => Some(power_update(a, b, j, *g)),
        FunctionKind::Log1pOverZ => Some(log1p_over_z_update(a, b, j)),
        _ => None,
    }
}

/// Trapezoid rule for `sum_k weight_k ((A + D + s_k)^{-1} - (A + s_k)^{-1})`
/// over `x` in `range(lo, hi)`, `(s_k, weight_k) = node(x_k)`; both spectra
/// must lie above `floor`.
fn quadrature_update(
    a: &DenseMatrix,
    b: &DenseMatrix,
    j: &DenseMatrix,
    floor: f64,
    range: impl Fn(f64, f64) -> (f64, f64),
    node: impl Fn(f64) -> (f64, f64),
) -> Result<DenseMatrix> {
    let n = a.rows();
    let l = b.cols();
    if b.rows() != n || j.rows() != l || j.cols() != l {
        return Err(Error::Dimension {
            context: "quadrature update",
            expected: n,
            found: b.rows(),
        });
    }
    let (vals, q) = hermitian_eigen(a, true)?;
    let q = q.expect("eigenvectors requested");
    let perturbed = hermitian_eigen(&(a + &b.matmul(j).mul_adjoint(b)), false)?.0;
    let lo = vals[0].min(perturbed[0]);
    let hi = vals[n - 1].max(perturbed[n - 1]);
    if !(lo > floor) {
        return Err(Error::InvalidArgument(alloc::format!(
            "spectrum must lie above {floor}"
        )));
    }
    let qb = q.adjoint_mul(b);
    let (x_lo, x_hi) = range(lo, hi);
    let steps = ((x_hi - x_lo) / QUADRATURE_STEP).ceil() as usize;
    let mut acc = DenseMatrix::zeros(n, n);
    for k in 0..=steps {
        let x = x_lo + k as f64 * QUADRATURE_STEP;
        let (s, weight) = node(x);
        let w = DenseMatrix::from_fn(n, l, |i, c| qb[(i, c)] / (vals[i] + s));
        let cap = &DenseMatrix::identity(l) + &qb.adjoint_mul(&w).matmul(j);
        let core = j.matmul(&inverse(&cap)?);
        let term = w.matmul(&core).mul_adjoint(&w);
        let weight = QUADRATURE_STEP * weight;
        for (dst, src) in acc.as_mut_slice().iter_mut().zip(term.as_slice()) {
            *dst -= *src * weight;
        }
    }
    Ok(q.matmul(&acc).mul_adjoint(&q))
}
