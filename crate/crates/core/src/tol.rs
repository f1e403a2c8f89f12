//! Relative tolerances shared across the crate.

pub const TOL_ORTH: f64 = 1e-12;
pub const TOL_SOLVE: f64 = 1e-12;
pub const TOL_PIVOT: f64 = 1e-14;
pub const TOL_DEFLATE: f64 = 1e-12;
pub const TOL_AXIS: f64 = 1e-12;

/// Cap on the eigenvector condition number for diagonalization-based matrix
/// functions: `1 / sqrt(machine epsilon)`.
pub const COND_CAP: f64 = 67_108_864.0;
