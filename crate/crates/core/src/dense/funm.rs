//! Functions of small matrices by diagonalization, with fallbacks for the
//! exponential (Padé scaling and squaring) and for rational functions
//! (direct shifted solves) when the eigenbasis is ill-conditioned.

use alloc::vec::Vec;

use super::{
    expm, shifted_factorize, spectral_decompose, DenseMatrix, SpectralDecomposition, Structure, C64,
};
use crate::error::{Error, Result};
use crate::function::{FunctionKind, FunctionSpec, RationalFunction};

/// Nonzero blocks of `f([[A11, A12], [0, A22]])`.
#[derive(Clone, Debug)]
pub struct BlockTriangularFunction {
    pub f11: DenseMatrix,
    pub f12: DenseMatrix,
    pub f22: DenseMatrix,
}

pub fn funm_small(a: &DenseMatrix, f: &FunctionSpec, structure: Structure) -> Result<DenseMatrix> {
    assert!(a.is_square(), "funm_small: square input");
    match spectral_decompose(a, structure) {
        Ok(d) => {
            let values = checked_values(&d, f, d.spectral_radius())?;
            let out = d.reassemble(&values);
            Ok(if structure == Structure::Hermitian && real_on_reals(f) {
                out.hermitian_part()
            } else {
                out
            })
        }
        Err(Error::IllConditionedEigenbasis { condition }) => fallback(a, f, condition),
        Err(e) => Err(e),
    }
}

fn fallback(a: &DenseMatrix, f: &FunctionSpec, condition: f64) -> Result<DenseMatrix> {
    match f.kind() {
        FunctionKind::Exp => expm(a),
        FunctionKind::Rational(r) => rational_direct(a, r),
        FunctionKind::Inverse => super::inverse(a),
        _ => Err(Error::IllConditionedEigenbasis { condition }),
    }
}

fn real_on_reals(f: &FunctionSpec) -> bool {
    !matches!(
        f.kind(),
        FunctionKind::Rational(_) | FunctionKind::Custom(_)
    )
}

fn checked_values(d: &SpectralDecomposition, f: &FunctionSpec, scale: f64) -> Result<Vec<C64>> {
    d.eigenvalues
        .iter()
        .map(|&z| f.eval_checked(z, scale))
        .collect()
}

fn rational_direct(a: &DenseMatrix, r: &RationalFunction) -> Result<DenseMatrix> {
    let n = a.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for c in r.polynomial_part().iter().rev() {
        out = &out.matmul(a) + &DenseMatrix::identity(n).scale(*c);
    }
    for t in r.terms() {
        let lu = shifted_factorize(a, t.pole)?;
        let mut pw = DenseMatrix::identity(n);
        for res in &t.residues {
            pw = lu.solve(&pw);
            out = &out + &pw.scale(*res);
        }
    }
    Ok(out)
}

/// Blocks of `f` applied to a 2x2 block upper triangular matrix. The
/// off-diagonal block uses divided differences in the two eigenbases, so
/// shared or clustered eigenvalues across the blocks are harmless.
pub fn funm_block_triangular(
    a11: &DenseMatrix,
    a12: &DenseMatrix,
    a22: &DenseMatrix,
    f: &FunctionSpec,
    s11: Structure,
    s22: Structure,
) -> Result<BlockTriangularFunction> {
    assert!(
        a11.is_square() && a22.is_square(),
        "funm_block_triangular: square diagonal blocks"
    );
    assert!(
        a12.rows() == a11.rows() && a12.cols() == a22.rows(),
        "funm_block_triangular: coupling block shape"
    );
    let d1 = spectral_decompose(a11, s11);
    let d2 = spectral_decompose(a22, s22);
    let (d1, d2) = match (d1, d2) {
        (Ok(d1), Ok(d2)) => (d1, d2),
        (Err(Error::IllConditionedEigenbasis { condition }), _)
        | (_, Err(Error::IllConditionedEigenbasis { condition })) => {
            return assembled(a11, a12, a22, f, condition);
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let scale = d1.spectral_radius().max(d2.spectral_radius());
    let v1 = checked_values(&d1, f, scale)?;
    let v2 = checked_values(&d2, f, scale)?;
    let f11 = d1.reassemble(&v1);
    let f22 = d2.reassemble(&v2);
    let mut m = d1.inverse_transform().matmul(a12).matmul(&d2.transform);
    for j in 0..m.cols() {
        let mu = d2.eigenvalues[j];
        for (i, z) in m.col_mut(j).iter_mut().enumerate() {
            let lam = d1.eigenvalues[i];
            *z *= if lam == mu {
                f.derivative(lam)
            } else {
                f.divided_difference(lam, mu)
            };
        }
    }
    let f12 = d1.transform.matmul(&m).matmul(d2.inverse_transform());
    let herm = real_on_reals(f);
    Ok(BlockTriangularFunction {
        f11: if herm && s11 == Structure::Hermitian {
            f11.hermitian_part()
        } else {
            f11
        },
        f12,
        f22: if herm && s22 == Structure::Hermitian {
            f22.hermitian_part()
        } else {
            f22
        },
    })
}

fn assembled(
    a11: &DenseMatrix,
    a12: &DenseMatrix,
    a22: &DenseMatrix,
    f: &FunctionSpec,
    condition: f64,
) -> Result<BlockTriangularFunction> {
    let (p, q) = (a11.rows(), a22.rows());
    let mut big = DenseMatrix::zeros(p + q, p + q);
    big.set_submatrix(0, 0, a11);
    big.set_submatrix(0, p, a12);
    big.set_submatrix(p, p, a22);
    let fb = match spectral_decompose(&big, Structure::General) {
        Ok(d) => d.reassemble(&checked_values(&d, f, d.spectral_radius())?),
        Err(Error::IllConditionedEigenbasis { .. }) => fallback(&big, f, condition)?,
        Err(e) => return Err(e),
    };
    Ok(BlockTriangularFunction {
        f11: fb.submatrix(0..p, 0..p),
        f12: fb.submatrix(0..p, p..p + q),
        f22: fb.submatrix(p..p + q, p..p + q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{rand_hermitian, rand_matrix, rng};
    use num_traits::One;

    #[test]
    fn nilpotent_exponential() {
        let a = DenseMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e = funm_small(&a, &FunctionSpec::exp(), Structure::General).unwrap();
        let want = DenseMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!((&e - &want).max_abs() < 1e-15);
    }

    #[test]
    fn sign_and_inverse_sqrt_of_diagonals() {
        let s = funm_small(
            &DenseMatrix::real_diag(&[-3.0, 5.0]),
            &FunctionSpec::sign(),
            Structure::Hermitian,
        )
        .unwrap();
        assert!((&s - &DenseMatrix::real_diag(&[-1.0, 1.0])).max_abs() < 1e-15);
        let r = funm_small(
            &DenseMatrix::real_diag(&[4.0, 9.0]),
            &FunctionSpec::inv_sqrt(),
            Structure::General,
        )
        .unwrap();
        assert!((&r - &DenseMatrix::real_diag(&[0.5, 1.0 / 3.0])).max_abs() < 1e-15);
    }

    #[test]
    fn singular_spectrum_is_reported() {
        let a = DenseMatrix::real_diag(&[-1.0, 2.0]);
        assert!(matches!(
            funm_small(&a, &FunctionSpec::inv_sqrt(), Structure::Hermitian),
            Err(Error::SingularityOnSpectrum { .. })
        ));
    }

    #[test]
    fn identity_and_constant() {
        let mut r = rng(31);
        let a = rand_matrix(&mut r, 12, 12);
        let id = funm_small(&a, &FunctionSpec::identity(), Structure::General).unwrap();
        assert!((&id - &a).max_abs() <= 1e-13 * a.norm_fro());
        let one = funm_small(&a, &FunctionSpec::constant(C64::one()), Structure::General).unwrap();
        assert!((&one - &DenseMatrix::identity(12)).max_abs() <= 1e-13 * a.norm_fro());
    }

    #[test]
    fn block_triangular_matches_assembled() {
        let mut r = rng(32);
        let a11 = rand_matrix(&mut r, 6, 6).scale_real(0.5);
        let a12 = rand_matrix(&mut r, 6, 6);
        let a22 = rand_matrix(&mut r, 6, 6).scale_real(0.5);
        let f = FunctionSpec::exp();
        let b = funm_block_triangular(&a11, &a12, &a22, &f, Structure::General, Structure::General)
            .unwrap();
        let mut big = DenseMatrix::zeros(12, 12);
        big.set_submatrix(0, 0, &a11);
        big.set_submatrix(0, 6, &a12);
        big.set_submatrix(6, 6, &a22);
        let full = expm(&big).unwrap();
        let scale = full.max_abs();
        assert!((&b.f12 - &full.submatrix(0..6, 6..12)).max_abs() <= 1e-10 * scale);
        assert!((&b.f11 - &full.submatrix(0..6, 0..6)).max_abs() <= 1e-10 * scale);
    }

    #[test]
    fn block_triangular_trivial_cases() {
        let mut r = rng(33);
        let a11 = rand_hermitian(&mut r, 4);
        let a22 = rand_hermitian(&mut r, 3);
        let a12 = rand_matrix(&mut r, 4, 3);
        let b = funm_block_triangular(
            &a11,
            &DenseMatrix::zeros(4, 3),
            &a22,
            &FunctionSpec::exp(),
            Structure::Hermitian,
            Structure::Hermitian,
        )
        .unwrap();
        assert_eq!(b.f12.max_abs(), 0.0);
        let b = funm_block_triangular(
            &a11,
            &a12,
            &a22,
            &FunctionSpec::identity(),
            Structure::Hermitian,
            Structure::Hermitian,
        )
        .unwrap();
        assert!((&b.f12 - &a12).max_abs() < 1e-13);
        // shared spectrum across the blocks
        let b = funm_block_triangular(
            &a11,
            &rand_matrix(&mut r, 4, 4),
            &a11,
            &FunctionSpec::exp(),
            Structure::Hermitian,
            Structure::Hermitian,
        )
        .unwrap();
        assert!(b.f12.is_finite());
    }

    #[test]
    fn hermitian_unitary_invariance() {
        let mut r = rng(34);
        let a = rand_hermitian(&mut r, 10);
        let d = spectral_decompose(&a, Structure::Hermitian).unwrap();
        let f = FunctionSpec::exp();
        let direct = funm_small(&a, &f, Structure::Hermitian).unwrap();
        let via: Vec<C64> = d.eigenvalues.iter().map(|&z| f.eval(z)).collect();
        let rec = d.reassemble(&via);
        assert!((&direct - &rec).max_abs() <= 1e-11 * direct.max_abs());
    }
}
