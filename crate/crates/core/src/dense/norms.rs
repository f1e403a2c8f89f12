use super::{hermitian_eigen, qr_orthonormalize, DenseMatrix};
use crate::error::Result;

/// Largest singular value, from the eigenvalues of the smaller Gram matrix.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    let s = a.max_abs();
    if s == 0.0 || !s.is_finite() {
        return s;
    }
    let b = a.scale_real(1.0 / s);
    let g = if b.rows() >= b.cols() {
        b.adjoint_mul(&b)
    } else {
        b.mul_adjoint(&b)
    };
    match hermitian_eigen(&g, false) {
        Ok((vals, _)) => s * vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => a.norm_fro(),
    }
}

/// Sine of the largest principal angle between `range(X)` and `range(Y)`;
/// both must have full column rank and the same number of columns.
pub fn subspace_gap(x: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
    let qx = qr_orthonormalize(x)?;
    let qy = qr_orthonormalize(y)?;
    let r1 = &qy - &qx.matmul(&qx.adjoint_mul(&qy));
    let r2 = &qx - &qy.matmul(&qy.adjoint_mul(&qx));
    Ok(spectral_norm(&r1).max(spectral_norm(&r2)))
}
