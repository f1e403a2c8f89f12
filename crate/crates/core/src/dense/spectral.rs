use alloc::vec::Vec;

use num_traits::Zero;

use super::{
    hermitian_eigen, inverse, schur, triangular_eigenvectors, DenseMatrix, Structure, C64,
};
use crate::error::{Error, Result};
use crate::tol::COND_CAP;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompositionKind {
    HermitianUnitary,
    GeneralSimilarity,
}

/// `A = V diag(lambda) V^{-1}`; for the Hermitian kind `V` is unitary and the
/// eigenvalues are real and ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub transform: DenseMatrix,
    pub kind: DecompositionKind,
    inverse: DenseMatrix,
    condition: f64,
}

impl SpectralDecomposition {
    /// `V^{-1}` (the adjoint in the Hermitian case).
    pub fn inverse_transform(&self) -> &DenseMatrix {
        &self.inverse
    }

    /// 1-norm condition estimate of the transform.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `V diag(values) V^{-1}`
    pub fn reassemble(&self, values: &[C64]) -> DenseMatrix {
        let mut vd = self.transform.clone();
        for (j, v) in values.iter().enumerate() {
            for z in vd.col_mut(j) {
                *z *= v;
            }
        }
        vd.matmul(&self.inverse)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub fn spectral_decompose(a: &DenseMatrix, structure: Structure) -> Result<SpectralDecomposition> {
    if !a.is_square() {
        return Err(Error::Dimension {
            context: "spectral_decompose",
            expected: a.rows(),
            found: a.cols(),
        });
    }
    match structure {
        Structure::Hermitian => {
            let (vals, q) = hermitian_eigen(a, true)?;
            let q = q.expect("eigenvectors requested");
            Ok(SpectralDecomposition {
                eigenvalues: vals.iter().map(|&x| C64::new(x, 0.0)).collect(),
                inverse: q.adjoint(),
                transform: q,
                kind: DecompositionKind::HermitianUnitary,
                condition: 1.0,
            })
        }
        Structure::General => {
            let s = schur(a)?;
            let y = triangular_eigenvectors(&s.t);
            let yinv = inverse(&y).map_err(|_| Error::IllConditionedEigenbasis {
                condition: f64::INFINITY,
            })?;
            let condition = y.norm_one() * yinv.norm_one();
            if !(condition <= COND_CAP) {
                return Err(Error::IllConditionedEigenbasis { condition });
            }
            let mut eigenvalues = s.eigenvalues();
            for z in eigenvalues.iter_mut() {
                if z.im.is_zero() {
                    z.im = 0.0;
                }
            }
            Ok(SpectralDecomposition {
                eigenvalues,
                transform: s.q.matmul(&y),
                inverse: yinv.mul_adjoint(&s.q),
                kind: DecompositionKind::GeneralSimilarity,
                condition,
            })
        }
    }
}
