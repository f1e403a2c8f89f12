//! Dense complex linear algebra for small and desk-scale matrices.

mod expm;
mod funm;
mod hermitian;
mod lu;
mod matrix;
mod norms;
mod power;
mod qr;
mod schur;
mod spectral;

pub use expm::expm;
pub use funm::{funm_block_triangular, funm_small, BlockTriangularFunction};
pub use hermitian::hermitian_eigen;
pub use lu::{inverse, shifted_factorize, solve, ShiftedFactorization};
pub use matrix::{axpy, dot, norm2, DenseMatrix};
pub use norms::{spectral_norm, subspace_gap};
pub use power::{log1p_over_z_update, markov_quadrature_update, power_update};
pub use qr::{orthonormality_defect, qr_orthonormalize};
#[allow(unused_imports)]
pub(crate) use qr::{orthonormalize_block, BlockFailure};
pub use schur::{schur, triangular_eigenvectors, Schur};
pub use spectral::{spectral_decompose, DecompositionKind, SpectralDecomposition};

pub type C64 = num_complex::Complex64;

/// Structure flag supplied by the caller; never inferred from the entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    General,
    Hermitian,
}
