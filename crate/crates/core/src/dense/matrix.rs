use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Range, Sub};

use num_traits::Zero;

use super::C64;
use crate::error::{Error, Result};

/// Dense complex matrix stored column-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "from_col_major",
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Row-major real entries; convenient for small literals in tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        m
    }

    /// Column vector from entries.
    pub fn column(values: &[C64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    /// The `i`-th canonical unit vector of length `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut m = Self::zeros(n, 1);
        m[(i, 0)] = C64::new(1.0, 0.0);
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `self - shift * I`.
    pub fn shifted(&self, shift: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= shift;
        }
        m
    }

    /// Contiguous block of columns.
    pub fn columns(&self, range: Range<usize>) -> Self {
        let r = self.rows;
        Self {
            rows: r,
            cols: range.len(),
            data: self.data[range.start * r..range.end * r].to_vec(),
        }
    }

    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows.start + i, cols.start + j)]
        })
    }

    pub fn set_submatrix(&mut self, row: usize, col: usize, block: &DenseMatrix) {
        for j in 0..block.cols {
            for i in 0..block.rows {
                self[(row + i, col + j)] = block[(i, j)];
            }
        }
    }

    /// Appends the columns of `other`.
    pub fn push_columns(&mut self, other: &DenseMatrix) {
        if self.cols == 0 && self.rows == 0 {
            self.rows = other.rows;
        }
        assert_eq!(self.rows, other.rows, "push_columns: row mismatch");
        self.data.extend_from_slice(&other.data);
        self.cols += other.cols;
    }

    /// `[self, other]`.
    pub fn hcat(&self, other: &DenseMatrix) -> Self {
        let mut m = self.clone();
        m.push_columns(other);
        m
    }

    /// `[self; other]`.
    pub fn vcat(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.cols, other.cols, "vcat: column mismatch");
        Self::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self[(i, j)]
            } else {
                other[(i - self.rows, j)]
            }
        })
    }

    /// Embeds `self` into the top-left corner of a `rows x cols` zero matrix.
    pub fn padded(&self, rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.set_submatrix(0, 0, self);
        m
    }

    /// `self^* other` without forming the adjoint.
    pub fn adjoint_mul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.rows, other.rows, "adjoint_mul: inner dimension");
        let mut out = Self::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            let b = other.col(j);
            for i in 0..self.cols {
                out[(i, j)] = dot(self.col(i), b);
            }
        }
        out
    }

    /// `self other^*`.
    pub fn mul_adjoint(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.cols, other.cols, "mul_adjoint: inner dimension");
        let mut out = Self::zeros(self.rows, other.rows);
        for k in 0..self.cols {
            let a = self.col(k);
            for j in 0..other.rows {
                let s = other[(j, k)].conj();
                if s.is_zero() {
                    continue;
                }
                axpy(out.col_mut(j), s, a);
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: inner dimension");
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let s = other[(k, j)];
                if s.is_zero() {
                    continue;
                }
                let a = &self.data[k * self.rows..(k + 1) * self.rows];
                axpy(out.col_mut(j), s, a);
            }
        }
        out
    }

    pub fn norm_fro(&self) -> f64 {
        // scaled sum of squares
        let mut scale = 0.0f64;
        let mut ssq = 1.0f64;
        for z in &self.data {
            for v in [z.re, z.im] {
                if v != 0.0 {
                    let a = v.abs();
                    if scale < a {
                        ssq = 1.0 + ssq * (scale / a) * (scale / a);
                        scale = a;
                    } else {
                        ssq += (a / scale) * (a / scale);
                    }
                }
            }
        }
        scale * ssq.sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.col(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Hermitian part `(A + A^*)/2`; used to clean round-off asymmetry.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// `max |A - A^*|` relative to `max |A|`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut d = 0.0f64;
        for j in 0..self.cols {
            for i in 0..=j {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        let s = self.max_abs();
        if s == 0.0 {
            0.0
        } else {
            d / s
        }
    }
}

/// `sum conj(a_i) b_i`
#[inline]
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

/// `y += s x`
#[inline]
pub fn axpy(y: &mut [C64], s: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        yi.re += s.re * xi.re - s.im * xi.im;
        yi.im += s.re * xi.im + s.im * xi.re;
    }
}

pub fn norm2(x: &[C64]) -> f64 {
    let mut scale = 0.0f64;
    let mut ssq = 1.0f64;
    for z in x {
        for v in [z.re, z.im] {
            if v != 0.0 {
                let a = v.abs();
                if scale < a {
                    ssq = 1.0 + ssq * (scale / a) * (scale / a);
                    scale = a;
                } else {
                    ssq += (a / scale) * (a / scale);
                }
            }
        }
    }
    scale * ssq.sqrt()
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.matmul(rhs)
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add: shape");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub: shape");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &DenseMatrix {
    type Output = DenseMatrix;
    fn neg(self) -> DenseMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:>11.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_length_and_nan() {
        assert!(matches!(
            DenseMatrix::from_col_major(2, 2, vec![C64::zero(); 3]),
            Err(Error::Dimension { .. })
        ));
        let mut v = vec![C64::zero(); 4];
        v[2] = C64::new(f64::NAN, 0.0);
        assert_eq!(DenseMatrix::from_col_major(2, 2, v), Err(Error::NonFinite));
    }

    #[test]
    fn products_agree() {
        let a = DenseMatrix::from_fn(3, 2, |i, j| C64::new(i as f64, j as f64 + 1.0));
        let b = DenseMatrix::from_fn(3, 4, |i, j| C64::new((i * j) as f64, -1.0));
        let p1 = a.adjoint_mul(&b);
        let p2 = a.adjoint().matmul(&b);
        assert!((&p1 - &p2).max_abs() < 1e-14);
        let c = DenseMatrix::from_fn(4, 2, |i, j| C64::new(j as f64, i as f64));
        let q1 = a.mul_adjoint(&c);
        let q2 = a.matmul(&c.adjoint());
        assert!((&q1 - &q2).max_abs() < 1e-14);
    }

    #[test]
    fn frobenius_norm_matches_naive() {
        let a = DenseMatrix::from_fn(4, 3, |i, j| C64::new(i as f64 - 1.5, j as f64 * 0.5));
        let naive: f64 = a
            .as_slice()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!((a.norm_fro() - naive).abs() < 1e-14 * naive);
    }
}
