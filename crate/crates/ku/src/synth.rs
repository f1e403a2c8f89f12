//! Seeded synthetic instances.

use ku_core::{DenseMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Real Gaussian vector scaled to the given Euclidean norm.
pub fn random_vector(rng: &mut impl Rng, n: usize, norm: f64) -> DenseMatrix {
    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let s = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
    DenseMatrix::column(&v.iter().map(|x| C64::new(x * s, 0.0)).collect::<Vec<_>>())
}

/// `n` logarithmically spaced points in `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Diagonal with log-spaced eigenvalues in `[1e-3, 1e3]` and a random `b`
/// of norm 100.
pub fn markov_instance(n: usize, seed: u64) -> (DenseMatrix, DenseMatrix) {
    let a = DenseMatrix::real_diag(&logspace(1e-3, 1e3, n));
    let b = random_vector(&mut rng(seed), n, 100.0);
    (a, b)
}

/// Diagonal with `n/2` linearly spaced eigenvalues in each of
/// `[-1, -1e-2]` and `[1e-2, 1]`, and a random unit `b`.
pub fn sign_instance(n: usize, seed: u64) -> (DenseMatrix, DenseMatrix) {
    let half = n / 2;
    let mut ev = linspace(-1.0, -1e-2, half);
    ev.extend(linspace(1e-2, 1.0, n - half));
    let a = DenseMatrix::real_diag(&ev);
    let b = random_vector(&mut rng(seed), n, 1.0);
    (a, b)
}
