use alloc::vec::Vec;

use super::matrix::{axpy, dot, norm2};
use super::{DenseMatrix, C64};
use crate::error::{Error, Result};
use crate::tol::TOL_DEFLATE;

/// Orthonormal basis of `range(W)` by classical Gram-Schmidt with one
/// unconditional reorthogonalization pass (CGS2).
pub fn qr_orthonormalize(w: &DenseMatrix) -> Result<DenseMatrix> {
    orthonormalize_block(None, w).map_err(
        |BlockFailure {
             column,
             relative_norm,
         }| Error::RankDeficient {
            step: 0,
            column,
            relative_norm,
        },
    )
}

#[derive(Debug)]
pub(crate) struct BlockFailure {
    pub column: usize,
    pub relative_norm: f64,
}

/// Orthogonalizes `w` against the orthonormal columns of `basis` and then
/// against itself, two passes each. A column whose norm falls below
/// `TOL_DEFLATE` times its initial norm is reported as a failure.
pub(crate) fn orthonormalize_block(
    basis: Option<&DenseMatrix>,
    w: &DenseMatrix,
) -> core::result::Result<DenseMatrix, BlockFailure> {
    let n = w.rows();
    let initial: Vec<f64> = (0..w.cols()).map(|j| norm2(w.col(j))).collect();
    let mut q = w.clone();
    if let Some(u) = basis {
        if u.cols() > 0 {
            for _ in 0..2 {
                let h = u.adjoint_mul(&q);
                let corr = u.matmul(&h);
                q = &q - &corr;
            }
        }
    }
    for j in 0..q.cols() {
        for _ in 0..2 {
            let coeffs: Vec<C64> = (0..j).map(|k| dot(q.col(k), q.col(j))).collect();
            let mut v = q.col(j).to_vec();
            for (k, c) in coeffs.iter().enumerate() {
                axpy(&mut v, -*c, q.col(k));
            }
            q.col_mut(j).copy_from_slice(&v);
        }
        let nrm = norm2(q.col(j));
        let rel = if initial[j] > 0.0 {
            nrm / initial[j]
        } else {
            0.0
        };
        if !(rel > TOL_DEFLATE) || nrm == 0.0 {
            return Err(BlockFailure {
                column: j,
                relative_norm: rel,
            });
        }
        let inv = 1.0 / nrm;
        for z in q.col_mut(j) {
            *z = z.scale(inv);
        }
    }
    debug_assert_eq!(q.rows(), n);
    Ok(q)
}

/// `||Q^* Q - I||_max`
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.adjoint_mul(q);
    let mut d = 0.0f64;
    for j in 0..g.cols() {
        for i in 0..g.rows() {
            let target = if i == j { 1.0 } else { 0.0 };
            d = d.max((g[(i, j)] - target).norm());
        }
    }
    d
}
