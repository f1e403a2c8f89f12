//! Rational Krylov approximation of low-rank updates `f(A + B C^*) - f(A)`.
//!
//! The crate carries everything numerical: a small dense complex linear
//! algebra layer, block rational Arnoldi, the projection update itself, pole
//! selection, a priori bounds, the sign-function and Sylvester
//! specializations, and brute-force reference implementations. File formats
//! and the experiment CLI live in the `ku` companion crate.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod arnoldi;
pub mod bounds;
pub mod dense;
mod error;
pub mod function;
pub mod oracle;
pub mod poles;
pub mod signsylv;
pub mod tol;
pub mod updater;

pub use arnoldi::{adjoint_basis, build_basis, KrylovBasis, OperatorTag, Pole, PolePlan};
pub use bounds::{BoundReport, SpectralWindow};
pub use dense::{DenseMatrix, Structure, C64};
pub use error::{Error, Result};
pub use function::{FunctionKind, FunctionSpec, RationalFunction};
pub use signsylv::{
    sign_update, sylvester_dense, sylvester_solve_krylov, SignUpdateInput, SylvesterProblem,
};
pub use updater::{
    run_update, run_update_observed, LowRankTerm, UpdateConfig, UpdateReport, UpdateState,
};

#[cfg(test)]
pub(crate) mod testutil;
