//! Hermitian eigensolver: Householder tridiagonalization, a diagonal phase
//! change to a real symmetric tridiagonal, then implicit QL with Wilkinson
//! shifts.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::matrix::{dot, norm2};
use super::{DenseMatrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues (ascending) and, optionally, unitary eigenvectors of a Hermitian
/// matrix. Only the lower triangle is read.
pub fn hermitian_eigen(
    a: &DenseMatrix,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<DenseMatrix>)> {
    assert!(a.is_square(), "hermitian_eigen: square input");
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| DenseMatrix::zeros(0, 0))));
    }
    let (d, e, q) = tridiagonalize(a, want_vectors);
    let mut offdiag: Vec<f64> = e.iter().map(|z| z.norm()).collect();
    offdiag.push(0.0);
    let mut diag = d;

    // phase change: T = P S P^*, S real symmetric
    let mut z = q.map(|mut q| {
        let mut phase = C64::new(1.0, 0.0);
        for k in 1..n {
            let ek = e[k - 1];
            let mag = ek.norm();
            if mag > 0.0 {
                phase = phase * ek / mag;
            }
            for x in q.col_mut(k) {
                *x *= phase;
            }
        }
        q
    });

    tql(&mut diag, &mut offdiag, z.as_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        diag[i]
            .partial_cmp(&diag[j])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = z.map(|z| {
        let mut out = DenseMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            out.col_mut(dst).copy_from_slice(z.col(src));
        }
        out
    });
    Ok((values, vectors))
}

/// Householder reduction `A = Q T Q^*` with `T` Hermitian tridiagonal.
/// Returns the real diagonal, complex subdiagonal, and `Q` if requested.
fn tridiagonalize(a: &DenseMatrix, want_q: bool) -> (Vec<f64>, Vec<C64>, Option<DenseMatrix>) {
    let n = a.rows();
    // work on a full Hermitian copy built from the lower triangle
    let mut h = DenseMatrix::from_fn(
        n,
        n,
        |i, j| {
            if i >= j {
                a[(i, j)]
            } else {
                a[(j, i)].conj()
            }
        },
    );
    let mut q = want_q.then(|| DenseMatrix::identity(n));
    let mut sub = vec![C64::zero(); n.saturating_sub(1)];
    let mut p = vec![C64::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = norm2(&x);
        let tail = norm2(&x[1..]);
        if tail == 0.0 {
            sub[k] = x[0];
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = norm2(&v);
        for z in v.iter_mut() {
            *z /= vn;
        }
        // p = H_sub v
        for i in 0..m {
            p[i] = C64::zero();
        }
        for j in 0..m {
            let vj = v[j];
            if vj.is_zero() {
                continue;
            }
            let col = &h.col(k + 1 + j)[k + 1..n];
            for i in 0..m {
                p[i] += col[i] * vj;
            }
        }
        let kk = dot(&v, &p[..m]).re;
        let w: Vec<C64> = (0..m).map(|i| p[i] - v[i] * kk).collect();
        // H_sub -= 2 v w^* + 2 w v^*
        for j in 0..m {
            let wj = w[j].conj() * 2.0;
            let vj = v[j].conj() * 2.0;
            let col = &mut h.col_mut(k + 1 + j)[k + 1..n];
            for i in 0..m {
                col[i] -= v[i] * wj + w[i] * vj;
            }
        }
        sub[k] = alpha;
        h[(k + 1, k)] = alpha;
        h[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            h[(i, k)] = C64::zero();
            h[(k, i)] = C64::zero();
        }
        if let Some(q) = q.as_mut() {
            // Q[:, k+1..] -= 2 (Q[:, k+1..] v) v^*
            let mut qv = vec![C64::zero(); n];
            for j in 0..m {
                let vj = v[j];
                let col = q.col(k + 1 + j);
                for i in 0..n {
                    qv[i] += col[i] * vj;
                }
            }
            for j in 0..m {
                let s = v[j].conj() * 2.0;
                let col = q.col_mut(k + 1 + j);
                for i in 0..n {
                    col[i] -= qv[i] * s;
                }
            }
        }
    }
    if n >= 2 {
        sub[n - 2] = h[(n - 1, n - 2)];
    }
    let diag = (0..n).map(|i| h[(i, i)].re).collect();
    (diag, sub, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix; `e[i]` couples `i`
/// and `i + 1`, `e[n-1]` is scratch. Rotations are accumulated into `z`.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut DenseMatrix>) -> Result<()> {
    let n = d.len();
    let scale = (0..n).fold(0.0f64, |s, i| s.max(d[i].abs() + e[i].abs()));
    let floor = 0.5 * f64::EPSILON * scale;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::EigenNoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let rows = z.rows();
                    let (left, right) = z.as_mut_slice().split_at_mut((i + 1) * rows);
                    let zi = &mut left[i * rows..];
                    let zi1 = &mut right[..rows];
                    for k in 0..rows {
                        let f = zi1[k];
                        zi1[k] = zi[k] * s + f * c;
                        zi[k] = zi[k] * c - f * s;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{rand_hermitian, rng};

    #[test]
    fn diagonal_sorted() {
        let a = DenseMatrix::real_diag(&[3.0, 1.0]);
        let (vals, vecs) = hermitian_eigen(&a, true).unwrap();
        assert_eq!(vals, vec![1.0, 3.0]);
        let v = vecs.unwrap();
        assert!((&v.adjoint_mul(&v) - &DenseMatrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn clustered_near_zero() {
        // numerically low rank: most eigenvalues are rounding noise around zero
        let mut r = rng(11);
        let n = 120;
        let b = rand_hermitian(&mut r, n).columns(0..3);
        let a = b.mul_adjoint(&b).hermitian_part();
        let (vals, vecs) = hermitian_eigen(&a, true).unwrap();
        let q = vecs.unwrap();
        let rec = q.matmul(&DenseMatrix::real_diag(&vals)).mul_adjoint(&q);
        assert!((&rec - &a).norm_fro() <= 1e-12 * a.norm_fro());
    }

    #[test]
    fn random_reconstruction() {
        let mut r = rng(7);
        for n in [1usize, 2, 3, 5, 17, 40] {
            let a = rand_hermitian(&mut r, n);
            let (vals, vecs) = hermitian_eigen(&a, true).unwrap();
            let q = vecs.unwrap();
            let lam = DenseMatrix::real_diag(&vals);
            let rec = q.matmul(&lam).mul_adjoint(&q);
            assert!((&rec - &a).norm_fro() <= 1e-11 * a.norm_fro(), "n={n}");
            assert!((&q.adjoint_mul(&q) - &DenseMatrix::identity(n)).max_abs() < 1e-12);
            let (vals2, none) = hermitian_eigen(&a, false).unwrap();
            assert!(none.is_none());
            for (x, y) in vals.iter().zip(&vals2) {
                assert!((x - y).abs() < 1e-11 * a.norm_fro());
            }
        }
    }
}
