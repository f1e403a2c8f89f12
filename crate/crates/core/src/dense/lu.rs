use alloc::vec::Vec;

use num_traits::Zero;

use super::{DenseMatrix, C64};
use crate::error::{Error, Result};
use crate::tol::TOL_PIVOT;

/// LU factorization (partial pivoting) of `A - shift * I`.
///
/// One factorization answers both `(A - ξI) X = Y` and `(A - ξI)^* X = Y`.
#[derive(Clone, Debug)]
pub struct ShiftedFactorization {
    shift: C64,
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl ShiftedFactorization {
    pub fn shift(&self) -> C64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `(A - ξI) X = Y`.
    pub fn solve(&self, y: &DenseMatrix) -> DenseMatrix {
        let n = self.dim();
        assert_eq!(y.rows(), n, "solve: rhs rows");
        let mut x = DenseMatrix::zeros(n, y.cols());
        for c in 0..y.cols() {
            let b = y.col(c);
            let xc = x.col_mut(c);
            for i in 0..n {
                xc[i] = b[self.perm[i]];
            }
            // L (unit lower)
            for k in 0..n {
                let v = xc[k];
                if v.is_zero() {
                    continue;
                }
                let lk = self.lu.col(k);
                for i in k + 1..n {
                    xc[i] -= lk[i] * v;
                }
            }
            // U
            for k in (0..n).rev() {
                let uk = self.lu.col(k);
                xc[k] /= uk[k];
                let v = xc[k];
                if v.is_zero() {
                    continue;
                }
                for i in 0..k {
                    xc[i] -= uk[i] * v;
                }
            }
        }
        x
    }

    /// Solves `(A - ξI)^* X = Y`, i.e. `(A^* - conj(ξ) I) X = Y`.
    pub fn solve_adjoint(&self, y: &DenseMatrix) -> DenseMatrix {
        let n = self.dim();
        assert_eq!(y.rows(), n, "solve_adjoint: rhs rows");
        let mut x = DenseMatrix::zeros(n, y.cols());
        let mut w = alloc::vec![C64::zero(); n];
        for c in 0..y.cols() {
            w.copy_from_slice(y.col(c));
            // U^* z = y (forward)
            for k in 0..n {
                let uk = self.lu.col(k);
                let mut s = w[k];
                for i in 0..k {
                    s -= uk[i].conj() * w[i];
                }
                w[k] = s / uk[k].conj();
            }
            // L^* v = z (backward, unit diagonal)
            for k in (0..n).rev() {
                let lk = self.lu.col(k);
                let mut s = w[k];
                for i in k + 1..n {
                    s -= lk[i].conj() * w[i];
                }
                w[k] = s;
            }
            let xc = x.col_mut(c);
            for i in 0..n {
                xc[self.perm[i]] = w[i];
            }
        }
        x
    }
}

/// Factorizes `A - xi I` with partial pivoting.
///
/// Fails with [`Error::SingularShift`] when a pivot drops below
/// `TOL_PIVOT * ||A - xi I||_1`.
pub fn shifted_factorize(a: &DenseMatrix, xi: C64) -> Result<ShiftedFactorization> {
    if !a.is_square() {
        return Err(Error::Dimension {
            context: "shifted_factorize",
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let n = a.rows();
    let mut lu = a.shifted(xi);
    let scale = lu.norm_one();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].norm();
        for i in k + 1..n {
            let v = lu[(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= TOL_PIVOT * scale || best == 0.0 {
            return Err(Error::SingularShift {
                shift: xi,
                pivot: best,
            });
        }
        if p != k {
            perm.swap(p, k);
            for j in 0..n {
                let t = lu[(p, j)];
                lu[(p, j)] = lu[(k, j)];
                lu[(k, j)] = t;
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            lu[(i, k)] /= pivot;
        }
        for j in k + 1..n {
            let s = lu[(k, j)];
            if s.is_zero() {
                continue;
            }
            let (left, right) = lu.as_mut_slice().split_at_mut(j * n);
            let lk = &left[k * n..(k + 1) * n];
            let cj = &mut right[..n];
            for i in k + 1..n {
                cj[i] -= lk[i] * s;
            }
        }
    }
    Ok(ShiftedFactorization {
        shift: xi,
        lu,
        perm,
    })
}

/// Solves `A X = Y` for square `A`.
pub fn solve(a: &DenseMatrix, y: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(shifted_factorize(a, C64::zero())?.solve(y))
}

pub fn inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    solve(a, &DenseMatrix::identity(a.rows()))
}
