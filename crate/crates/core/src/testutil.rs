use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::dense::{DenseMatrix, C64};

pub type TestRng = Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> TestRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn normal(r: &mut TestRng) -> f64 {
    StandardNormal.sample(r)
}

pub fn rand_matrix(r: &mut TestRng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| C64::new(normal(r), normal(r)))
}

pub fn rand_hermitian(r: &mut TestRng, n: usize) -> DenseMatrix {
    rand_matrix(r, n, n).hermitian_part()
}
