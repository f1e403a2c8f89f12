//! Complex Schur form `A = Q T Q^*` by Householder reduction to upper
//! Hessenberg form followed by single-shift QR with Wilkinson shifts.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::matrix::norm2;
use super::{DenseMatrix, C64};
use crate::error::{Error, Result};

const MAX_ITER_PER_EIGENVALUE: usize = 40;

#[derive(Clone, Debug)]
pub struct Schur {
    /// Unitary Schur vectors.
    pub q: DenseMatrix,
    /// Upper triangular factor.
    pub t: DenseMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.rows()).map(|i| self.t[(i, i)]).collect()
    }
}

pub fn schur(a: &DenseMatrix) -> Result<Schur> {
    assert!(a.is_square(), "schur: square input");
    let n = a.rows();
    let mut h = a.clone();
    let mut q = DenseMatrix::identity(n);
    hessenberg(&mut h, &mut q);
    qr_iterate(&mut h, &mut q)?;
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = C64::zero();
        }
    }
    Ok(Schur { q, t: h })
}

fn hessenberg(h: &mut DenseMatrix, q: &mut DenseMatrix) {
    let n = h.rows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        if norm2(&x[1..]) == 0.0 {
            continue;
        }
        let xnorm = norm2(&x);
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = norm2(&v);
        for z in v.iter_mut() {
            *z /= vn;
        }
        // left: rows k+1.., columns k..
        for j in k..n {
            let col = h.col_mut(j);
            let mut s = C64::zero();
            for (i, vi) in v.iter().enumerate() {
                s += vi.conj() * col[k + 1 + i];
            }
            let s = s * 2.0;
            for (i, vi) in v.iter().enumerate() {
                col[k + 1 + i] -= vi * s;
            }
        }
        // right: all rows, columns k+1..
        apply_right(h, k + 1, &v);
        apply_right(q, k + 1, &v);
        for i in k + 2..n {
            h[(i, k)] = C64::zero();
        }
    }
}

/// `M[:, off..] <- M[:, off..] (I - 2 v v^*)`
fn apply_right(m: &mut DenseMatrix, off: usize, v: &[C64]) {
    let rows = m.rows();
    let mut mv = vec![C64::zero(); rows];
    for (j, vj) in v.iter().enumerate() {
        let col = m.col(off + j);
        for i in 0..rows {
            mv[i] += col[i] * vj;
        }
    }
    for (j, vj) in v.iter().enumerate() {
        let s = vj.conj() * 2.0;
        let col = m.col_mut(off + j);
        for i in 0..rows {
            col[i] -= mv[i] * s;
        }
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, C64::zero());
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

fn qr_iterate(h: &mut DenseMatrix, q: &mut DenseMatrix) -> Result<()> {
    let n = h.rows();
    if n <= 1 {
        return Ok(());
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // locate the active unreduced block [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let sub = h[(lo, lo - 1)].norm();
            if sub <= f64::EPSILON * s || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = C64::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_ITER_PER_EIGENVALUE || total > 100 * n.max(10) {
            return Err(Error::EigenNoConvergence);
        }
        let mu = if iter.is_multiple_of(11) {
            // exceptional shift
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        let mut x = h[(lo, lo)] - mu;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            let (c, s) = givens(x, y);
            // rows k, k+1 from column max(k,1)-1 onwards
            let start = if k > lo { k - 1 } else { lo };
            for j in start..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            // columns k, k+1 for rows 0..=min(k+2, hi)
            let end = (k + 2).min(hi);
            rotate_columns(h, k, c, s, end + 1);
            rotate_columns(q, k, c, s, n);
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    Ok(())
}

/// `M[:, k..k+2] <- M[:, k..k+2] G^*` over the first `rows` rows.
fn rotate_columns(m: &mut DenseMatrix, k: usize, c: f64, s: C64, rows: usize) {
    let nr = m.rows();
    let (left, right) = m.as_mut_slice().split_at_mut((k + 1) * nr);
    let ck = &mut left[k * nr..];
    let ck1 = &mut right[..nr];
    let sc = s.conj();
    for i in 0..rows {
        let a = ck[i];
        let b = ck1[i];
        ck[i] = a * c + sc * b;
        ck1[i] = -s * a + b * c;
    }
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let e1 = (a + d) * 0.5 + disc;
    let e2 = (a + d) * 0.5 - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// Eigenvectors of an upper triangular matrix by back substitution; columns
/// are normalized to unit 2-norm.
pub fn triangular_eigenvectors(t: &DenseMatrix) -> DenseMatrix {
    let n = t.rows();
    let tnorm = t.max_abs().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut y = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        let col = y.col_mut(k);
        col[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::zero();
            for j in i + 1..=k {
                s += t[(i, j)] * col[j];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < small {
                den = C64::new(small, 0.0);
            }
            col[i] = -s / den;
        }
        let nrm = norm2(col);
        for z in col.iter_mut() {
            *z /= nrm;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{rand_matrix, rng};

    #[test]
    fn schur_reconstructs() {
        let mut r = rng(5);
        for n in [1usize, 2, 3, 8, 25, 60] {
            let a = rand_matrix(&mut r, n, n);
            let s = schur(&a).unwrap();
            let rec = s.q.matmul(&s.t).mul_adjoint(&s.q);
            assert!(
                (&rec - &a).norm_fro() <= 1e-12 * a.norm_fro() * (n as f64),
                "n={n}"
            );
            assert!((&s.q.adjoint_mul(&s.q) - &DenseMatrix::identity(n)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_generator() {
        let a = DenseMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let mut ev = schur(&a).unwrap().eigenvalues();
        ev.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((ev[0] - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - C64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn real_matrix_with_real_diagonal_spectrum() {
        let a =
            DenseMatrix::from_real_rows(&[&[4.0, 1.0, 0.0], &[0.0, 3.0, 1.0], &[0.0, 0.0, 2.0]]);
        let mut ev: Vec<f64> = schur(&a)
            .unwrap()
            .eigenvalues()
            .iter()
            .map(|z| z.re)
            .collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in ev.iter().zip([2.0, 3.0, 4.0]) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
