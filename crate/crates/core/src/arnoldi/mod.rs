//! Block rational Arnoldi: orthonormal bases of `q_m(Op)^{-1} K_m(Op, B)` for
//! `Op` one of `A`, `A^*` or `A^2`, together with the compression
//! `U^* Op U` formed by explicit projection.

mod plan;

pub use plan::{Ordering, Pole, PolePlan, Repetition};

use alloc::vec::Vec;

use crate::dense::{
    orthonormalize_block, shifted_factorize, DenseMatrix, ShiftedFactorization, C64,
};
use crate::error::{Error, Result};

/// Operator compressed by a basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorTag {
    A,
    AdjointA,
    SquareA,
}

/// Orthonormal block basis `U` with compression `U^* Op U`.
#[derive(Clone, Debug)]
pub struct KrylovBasis {
    basis: DenseMatrix,
    op_basis: DenseMatrix,
    compression: DenseMatrix,
    block_size: usize,
    poles_used: Vec<Pole>,
    operator: OperatorTag,
}

impl KrylovBasis {
    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    /// `Op U`, kept to extend the compression without recomputation.
    pub fn op_basis(&self) -> &DenseMatrix {
        &self.op_basis
    }

    pub fn compression(&self) -> &DenseMatrix {
        &self.compression
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn poles_used(&self) -> &[Pole] {
        &self.poles_used
    }

    pub fn steps(&self) -> usize {
        self.poles_used.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn operator(&self) -> OperatorTag {
        self.operator
    }
}

/// LU factorizations of `M - xi I` keyed by `xi`, where `M` is `A` or `A^2`.
/// Adjoint solves reuse the factorization of `A - xi I`.
#[derive(Default)]
pub struct FactorizationCache {
    plain: Vec<ShiftedFactorization>,
    square: Vec<ShiftedFactorization>,
}

impl FactorizationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.plain.len() + self.square.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&mut self, square: bool, m: &DenseMatrix, xi: C64) -> Result<&ShiftedFactorization> {
        let list = if square {
            &mut self.square
        } else {
            &mut self.plain
        };
        let idx = match list.iter().position(|f| f.shift() == xi) {
            Some(i) => i,
            None => {
                list.push(shifted_factorize(m, xi)?);
                list.len() - 1
            }
        };
        Ok(&list[idx])
    }
}

/// Incremental block rational Arnoldi on one operator.
pub struct ArnoldiProcess<'a> {
    a: &'a DenseMatrix,
    square: Option<DenseMatrix>,
    tag: OperatorTag,
    seed: DenseMatrix,
    op_norm: f64,
    state: Option<KrylovBasis>,
}

impl<'a> ArnoldiProcess<'a> {
    pub fn new(a: &'a DenseMatrix, tag: OperatorTag, seed: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension {
                context: "arnoldi operator",
                expected: a.rows(),
                found: a.cols(),
            });
        }
        if seed.rows() != a.rows() {
            return Err(Error::Dimension {
                context: "arnoldi seed block",
                expected: a.rows(),
                found: seed.rows(),
            });
        }
        let square = (tag == OperatorTag::SquareA).then(|| a.matmul(a));
        let op_norm = match &square {
            Some(s) => s.norm_one(),
            None => a.norm_one().max(a.adjoint().norm_one()),
        };
        Ok(Self {
            a,
            square,
            tag,
            seed: seed.clone(),
            op_norm,
            state: None,
        })
    }

    pub fn basis(&self) -> Option<&KrylovBasis> {
        self.state.as_ref()
    }

    pub fn into_basis(self) -> Option<KrylovBasis> {
        self.state
    }

    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        match self.tag {
            OperatorTag::A => self.a.matmul(x),
            OperatorTag::AdjointA => self.a.adjoint_mul(x),
            OperatorTag::SquareA => self.a.matmul(&self.a.matmul(x)),
        }
    }

    /// `(Op - pole I)^{-1} y`; for the adjoint the stored shift is the plan
    /// pole and the solve runs with its conjugate.
    fn resolve(
        &self,
        cache: &mut FactorizationCache,
        xi: C64,
        y: &DenseMatrix,
    ) -> Result<DenseMatrix> {
        match self.tag {
            OperatorTag::A => Ok(cache.get(false, self.a, xi)?.solve(y)),
            OperatorTag::AdjointA => Ok(cache.get(false, self.a, xi)?.solve_adjoint(y)),
            OperatorTag::SquareA => {
                let sq = self.square.as_ref().expect("square operator");
                Ok(cache.get(true, sq, xi)?.solve(y))
            }
        }
    }

    /// Appends one block for `pole`. For the adjoint operator `pole` is the
    /// plan pole; the space built is `conj(q)(A^*)^{-1} K(A^*, C)`.
    pub fn step(&mut self, cache: &mut FactorizationCache, pole: Pole) -> Result<&KrylovBasis> {
        let step_index = self.state.as_ref().map_or(0, |s| s.steps());
        let w = match (&self.state, pole) {
            (None, Pole::Infinite) => self.seed.clone(),
            (None, Pole::Finite(xi)) => self.resolve(cache, xi, &self.seed)?,
            (Some(s), Pole::Infinite) => s.op_basis.columns(s.dim() - s.block_size..s.dim()),
            (Some(s), Pole::Finite(xi)) => {
                let lo = s.dim() - s.block_size;
                let rhs = if xi.norm() <= 1e-8 * self.op_norm {
                    s.basis.columns(lo..s.dim())
                } else {
                    s.op_basis.columns(lo..s.dim())
                };
                self.resolve(cache, xi, &rhs)?
            }
        };
        let prev = self.state.as_ref().map(|s| &s.basis);
        let room = w.rows() - prev.map_or(0, |p| p.cols());
        let block = match orthonormalize_block(prev, &w) {
            Ok(b) => b,
            // the last block of a space about to fill C^n keeps its independent columns
            Err(_) if w.cols() > room => {
                let mut kept: Option<DenseMatrix> = None;
                for j in 0..w.cols() {
                    let all = match (prev, &kept) {
                        (Some(p), Some(k)) => Some(p.hcat(k)),
                        (None, Some(k)) => Some(k.clone()),
                        (p, None) => p.cloned(),
                    };
                    if let Ok(col) = orthonormalize_block(all.as_ref(), &w.columns(j..j + 1)) {
                        kept = Some(match kept {
                            Some(k) => k.hcat(&col),
                            None => col,
                        });
                    }
                    if kept.as_ref().map_or(0, |k| k.cols()) == room {
                        break;
                    }
                }
                kept.ok_or(Error::RankDeficient {
                    step: step_index + 1,
                    column: 0,
                    relative_norm: 0.0,
                })?
            }
            Err(e) => {
                return Err(Error::RankDeficient {
                    step: step_index + 1,
                    column: e.column,
                    relative_norm: e.relative_norm,
                })
            }
        };
        let op_block = self.apply(&block);
        match self.state.as_mut() {
            None => {
                let compression = block.adjoint_mul(&op_block);
                self.state = Some(KrylovBasis {
                    block_size: block.cols(),
                    basis: block,
                    op_basis: op_block,
                    compression,
                    poles_used: alloc::vec![pole],
                    operator: self.tag,
                });
            }
            Some(s) => {
                let old = s.dim();
                let new = old + block.cols();
                let mut g = DenseMatrix::zeros(new, new);
                g.set_submatrix(0, 0, &s.compression);
                g.set_submatrix(0, old, &s.basis.adjoint_mul(&op_block));
                g.set_submatrix(old, 0, &block.adjoint_mul(&s.op_basis));
                g.set_submatrix(old, old, &block.adjoint_mul(&op_block));
                s.compression = g;
                s.basis.push_columns(&block);
                s.op_basis.push_columns(&op_block);
                s.poles_used.push(pole);
            }
        }
        Ok(self.state.as_ref().expect("basis present"))
    }
}

/// One step of the block rational Arnoldi process on `a` (operator `tag`)
/// starting from `state`, or from the seed block when `state` is `None`.
pub fn rational_arnoldi_step(
    state: Option<KrylovBasis>,
    a: &DenseMatrix,
    tag: OperatorTag,
    seed: &DenseMatrix,
    pole: Pole,
) -> Result<KrylovBasis> {
    let mut p = ArnoldiProcess::new(a, tag, seed)?;
    p.state = state;
    let mut cache = FactorizationCache::new();
    p.step(&mut cache, pole)?;
    Ok(p.into_basis().expect("basis present"))
}

fn build(
    a: &DenseMatrix,
    tag: OperatorTag,
    seed: &DenseMatrix,
    plan: &PolePlan,
    m: usize,
) -> Result<KrylovBasis> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "basis needs at least one step".into(),
        ));
    }
    let mut p = ArnoldiProcess::new(a, tag, seed)?;
    let mut cache = FactorizationCache::new();
    for pole in plan.expand(m)? {
        p.step(&mut cache, pole)?;
    }
    Ok(p.into_basis().expect("basis present"))
}

/// Basis of `q_m(A)^{-1} K_m(A, B)` with `q_m` built from the finite poles of
/// the first `m` plan entries.
pub fn build_basis(
    a: &DenseMatrix,
    b: &DenseMatrix,
    plan: &PolePlan,
    m: usize,
) -> Result<KrylovBasis> {
    build(a, OperatorTag::A, b, plan, m)
}

/// Basis of `conj(q_m)(A^*)^{-1} K_m(A^*, C)`.
pub fn adjoint_basis(
    a: &DenseMatrix,
    c: &DenseMatrix,
    plan: &PolePlan,
    m: usize,
) -> Result<KrylovBasis> {
    build(a, OperatorTag::AdjointA, c, plan, m)
}

/// Basis of `q_m(A^2)^{-1} K_m(A^2, B)`.
pub fn square_basis(
    a: &DenseMatrix,
    b: &DenseMatrix,
    plan: &PolePlan,
    m: usize,
) -> Result<KrylovBasis> {
    build(a, OperatorTag::SquareA, b, plan, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{hermitian_eigen, inverse, orthonormality_defect, subspace_gap};
    use crate::testutil::{rand_hermitian, rand_matrix, rng};
    use alloc::vec;

    fn inf() -> PolePlan {
        PolePlan::cyclic(vec![Pole::Infinite])
    }

    #[test]
    fn eigenvector_seed() {
        let a = DenseMatrix::real_diag(&[1.0, 2.0, 3.0]);
        let k = build_basis(&a, &DenseMatrix::unit(3, 0), &inf(), 1).unwrap();
        assert!((k.basis() - &DenseMatrix::unit(3, 0)).max_abs() < 1e-15);
    }

    #[test]
    fn diagonal_shifted_seed() {
        let a = DenseMatrix::real_diag(&[1.0, 2.0]);
        let s = 0.5f64.sqrt();
        let b = DenseMatrix::from_real_rows(&[&[s], &[s]]);
        let k = build_basis(&a, &b, &PolePlan::new(vec![Pole::real(0.0)]), 1).unwrap();
        let nrm = (1.25f64).sqrt();
        let want = DenseMatrix::from_real_rows(&[&[1.0 / nrm], &[0.5 / nrm]]);
        assert!((k.basis() - &want).max_abs() < 1e-15);
    }

    #[test]
    fn explicit_rational_space() {
        let mut r = rng(51);
        let a = rand_hermitian(&mut r, 50);
        let b = rand_matrix(&mut r, 50, 2);
        let plan = PolePlan::new(vec![Pole::real(-1.0), Pole::real(-3.0), Pole::Infinite]);
        let a = a.shifted(C64::new(-20.0, 0.0));
        let k = build_basis(&a, &b, &plan, 3).unwrap();
        let ab = a.matmul(&b);
        let kry = b.hcat(&ab).hcat(&a.matmul(&ab));
        let q = a
            .shifted(C64::new(-1.0, 0.0))
            .matmul(&a.shifted(C64::new(-3.0, 0.0)));
        let want = inverse(&q).unwrap().matmul(&kry);
        assert!(subspace_gap(k.basis(), &want).unwrap() < 1e-10);
        assert!(orthonormality_defect(k.basis()) < 1e-12);
    }

    #[test]
    fn polynomial_space_and_containment() {
        let mut r = rng(52);
        let a = rand_hermitian(&mut r, 30);
        let b = rand_matrix(&mut r, 30, 1);
        let k = build_basis(&a, &b, &inf(), 4).unwrap();
        let mut kry = b.clone();
        let mut x = b.clone();
        for _ in 0..3 {
            x = a.matmul(&x);
            kry = kry.hcat(&x);
        }
        assert!(subspace_gap(k.basis(), &kry).unwrap() < 1e-10);
        let (la, _) = hermitian_eigen(&a, false).unwrap();
        let (lg, _) = hermitian_eigen(&k.compression().hermitian_part(), false).unwrap();
        let tol = 1e-12 * a.norm_fro();
        assert!(lg[0] >= la[0] - tol && *lg.last().unwrap() <= *la.last().unwrap() + tol);
        let g = k.basis().adjoint_mul(&a.matmul(k.basis()));
        assert!((&g - k.compression()).max_abs() < 1e-12 * a.norm_fro());
    }

    #[test]
    fn nested_prefix_is_bitwise() {
        let mut r = rng(53);
        let a = rand_matrix(&mut r, 20, 20);
        let b = rand_matrix(&mut r, 20, 2);
        let plan = PolePlan::cyclic(vec![
            Pole::real(-7.0),
            Pole::Infinite,
            Pole::Finite(C64::new(1.0, 6.0)),
        ]);
        let k3 = build_basis(&a, &b, &plan, 3).unwrap();
        let k4 = build_basis(&a, &b, &plan, 4).unwrap();
        assert_eq!(k4.basis().columns(0..6), *k3.basis());
        assert_eq!(k4.compression().submatrix(0..6, 0..6), *k3.compression());
    }

    #[test]
    fn adjoint_of_hermitian_matches() {
        let mut r = rng(54);
        let a = rand_hermitian(&mut r, 25).shifted(C64::new(-15.0, 0.0));
        let b = rand_matrix(&mut r, 25, 1);
        let plan = PolePlan::new(vec![Pole::real(-2.0), Pole::Infinite, Pole::real(-5.0)]);
        let u = build_basis(&a, &b, &plan, 3).unwrap();
        let v = adjoint_basis(&a, &b, &plan, 3).unwrap();
        assert!(subspace_gap(u.basis(), v.basis()).unwrap() < 1e-10);
    }

    #[test]
    fn adjoint_small_and_nonhermitian() {
        let a = DenseMatrix::real_diag(&[1.0, 2.0]);
        let v = adjoint_basis(&a, &DenseMatrix::unit(2, 1), &inf(), 1).unwrap();
        assert!((v.basis() - &DenseMatrix::unit(2, 1)).max_abs() < 1e-15);
        let mut r = rng(55);
        let a = rand_matrix(&mut r, 40, 40);
        let c = rand_matrix(&mut r, 40, 1);
        let plan = PolePlan::new(vec![
            Pole::Finite(C64::new(-1.0, 2.0)),
            Pole::Finite(C64::new(-1.0, -2.0)),
        ]);
        let v = adjoint_basis(&a, &c, &plan, 2).unwrap();
        assert!(orthonormality_defect(v.basis()) < 1e-12);
        let h = v.basis().adjoint_mul(&a.adjoint().matmul(v.basis()));
        assert!((&h - v.compression()).max_abs() < 1e-12 * a.norm_fro());
    }

    #[test]
    fn overflowing_last_block_is_truncated() {
        let mut r = rng(57);
        let a = rand_matrix(&mut r, 7, 7).shifted(C64::new(-6.0, 0.0));
        let b = rand_matrix(&mut r, 7, 2);
        let k = build_basis(&a, &b, &inf(), 4).unwrap();
        assert_eq!(k.dim(), 7);
        assert!(orthonormality_defect(k.basis()) < 1e-12);
        let g = k.basis().adjoint_mul(&a.matmul(k.basis()));
        assert!((&g - k.compression()).max_abs() < 1e-12 * a.norm_fro());
        assert!(build_basis(&a, &b, &inf(), 5).is_err());
    }

    #[test]
    fn breakdown_is_reported() {
        let a = DenseMatrix::real_diag(&[1.0, 2.0, 3.0]);
        let err = build_basis(&a, &DenseMatrix::unit(3, 0), &inf(), 2).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { step: 2, .. }));
        let err = build_basis(
            &a,
            &DenseMatrix::unit(3, 0),
            &PolePlan::new(vec![Pole::real(2.0)]),
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularShift { .. }));
    }

    #[test]
    fn cache_reuses_repeated_poles() {
        let mut r = rng(56);
        let a = rand_matrix(&mut r, 15, 15);
        let b = rand_matrix(&mut r, 15, 1);
        let mut p = ArnoldiProcess::new(&a, OperatorTag::A, &b).unwrap();
        let mut cache = FactorizationCache::new();
        for _ in 0..4 {
            p.step(&mut cache, Pole::real(-9.0)).unwrap();
        }
        assert_eq!(cache.len(), 1);
        let mut q = ArnoldiProcess::new(&a, OperatorTag::AdjointA, &b).unwrap();
        q.step(&mut cache, Pole::real(-9.0)).unwrap();
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn single_step_api() {
        let a = DenseMatrix::real_diag(&[1.0, 2.0, 3.0]);
        let b = DenseMatrix::from_real_rows(&[&[1.0], &[1.0], &[0.0]]);
        let k1 = rational_arnoldi_step(None, &a, OperatorTag::A, &b, Pole::Infinite).unwrap();
        let k2 = rational_arnoldi_step(Some(k1), &a, OperatorTag::A, &b, Pole::real(-1.0)).unwrap();
        assert_eq!(k2.dim(), 2);
        assert!(orthonormality_defect(k2.basis()) < 1e-14);
    }
}
