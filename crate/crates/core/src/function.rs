//! Scalar functions applied to matrices: a fixed catalog, rational functions in
//! partial-fraction form, and user supplied maps.
//!
//! Besides point values every function provides its derivative and a divided
//! difference `f[a, b] = (f(a) - f(b)) / (a - b)` that stays accurate when `a`
//! and `b` coalesce. The divided difference drives the off-diagonal block of
//! block triangular matrix functions.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::dense::{schur, DenseMatrix, C64};
use crate::error::{Error, Result};
use crate::tol::TOL_AXIS;

/// A scalar map with optional analytic derivative, used for
/// [`FunctionKind::Custom`].
#[derive(Clone, Copy, Debug)]
pub struct CustomFunction {
    pub value: fn(C64) -> C64,
    pub derivative: Option<fn(C64) -> C64>,
}

/// One pole of a partial-fraction expansion: `sum_j residues[j-1] (z - pole)^-j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleTerm {
    pub pole: C64,
    pub residues: Vec<C64>,
}

/// Rational function `p(z) + sum_s sum_j r_{s,j} (z - xi_s)^{-j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    polynomial: Vec<C64>,
    terms: Vec<PoleTerm>,
}

#[derive(Clone, Debug)]
pub enum FunctionKind {
    Exp,
    InvSqrt,
    Sqrt,
    /// `log(1 + z) / z`
    Log1pOverZ,
    /// `z^(-gamma)`
    InvPower(f64),
    Sign,
    Inverse,
    Rational(RationalFunction),
    Custom(CustomFunction),
}

/// A function together with its Markov support `(alpha, beta)` when it is a
/// Cauchy transform of a positive measure on `[alpha, beta]`.
#[derive(Clone, Debug)]
pub struct FunctionSpec {
    kind: FunctionKind,
    markov_support: Option<(f64, f64)>,
}

impl FunctionSpec {
    pub fn new(kind: FunctionKind) -> Self {
        let markov_support = match &kind {
            FunctionKind::InvSqrt => Some((f64::NEG_INFINITY, 0.0)),
            FunctionKind::InvPower(g) if *g > 0.0 && *g < 1.0 => Some((f64::NEG_INFINITY, 0.0)),
            FunctionKind::Log1pOverZ => Some((f64::NEG_INFINITY, -1.0)),
            _ => None,
        };
        Self {
            kind,
            markov_support,
        }
    }

    pub fn exp() -> Self {
        Self::new(FunctionKind::Exp)
    }
    pub fn inv_sqrt() -> Self {
        Self::new(FunctionKind::InvSqrt)
    }
    pub fn sqrt() -> Self {
        Self::new(FunctionKind::Sqrt)
    }
    pub fn log1p_over_z() -> Self {
        Self::new(FunctionKind::Log1pOverZ)
    }
    pub fn inv_power(gamma: f64) -> Self {
        Self::new(FunctionKind::InvPower(gamma))
    }
    pub fn sign() -> Self {
        Self::new(FunctionKind::Sign)
    }
    pub fn inverse() -> Self {
        Self::new(FunctionKind::Inverse)
    }
    pub fn rational(r: RationalFunction) -> Self {
        Self::new(FunctionKind::Rational(r))
    }
    pub fn polynomial(coeffs: &[C64]) -> Self {
        Self::rational(RationalFunction::polynomial(coeffs))
    }
    /// `z -> z`
    pub fn identity() -> Self {
        Self::polynomial(&[C64::zero(), C64::one()])
    }
    pub fn constant(c: C64) -> Self {
        Self::polynomial(&[c])
    }
    pub fn custom(value: fn(C64) -> C64, derivative: Option<fn(C64) -> C64>) -> Self {
        Self::new(FunctionKind::Custom(CustomFunction { value, derivative }))
    }

    /// Overrides the Markov support; requires `alpha < beta`.
    pub fn with_markov_support(mut self, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha < beta) || beta.is_nan() {
            return Err(Error::InvalidArgument(alloc::format!(
                "Markov support needs alpha < beta, got ({alpha}, {beta})"
            )));
        }
        self.markov_support = Some((alpha, beta));
        Ok(self)
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn markov_support(&self) -> Option<(f64, f64)> {
        self.markov_support
    }

    pub fn eval(&self, z: C64) -> C64 {
        match &self.kind {
            FunctionKind::Exp => z.exp(),
            FunctionKind::InvSqrt => z.sqrt().inv(),
            FunctionKind::Sqrt => z.sqrt(),
            FunctionKind::Log1pOverZ => log1p_over_z(z),
            FunctionKind::InvPower(g) => principal_power(z, -*g),
            FunctionKind::Sign => sign(z),
            FunctionKind::Inverse => z.inv(),
            FunctionKind::Rational(r) => r.eval(z),
            FunctionKind::Custom(c) => (c.value)(z),
        }
    }

    /// Point value with a check that `z` is not on (or numerically near) a
    /// singularity or branch cut. `scale` is the magnitude of the matrix the
    /// spectral point belongs to.
    pub fn eval_checked(&self, z: C64, scale: f64) -> Result<C64> {
        let bad = match &self.kind {
            FunctionKind::Exp | FunctionKind::Custom(_) => false,
            FunctionKind::Sign => z.re.abs() <= TOL_AXIS * scale,
            FunctionKind::InvSqrt | FunctionKind::Sqrt | FunctionKind::InvPower(_) => z.re <= 0.0,
            FunctionKind::Log1pOverZ => 1.0 + z.re <= 0.0,
            FunctionKind::Inverse => z.norm() <= TOL_AXIS * scale,
            FunctionKind::Rational(r) => r
                .terms
                .iter()
                .any(|t| (z - t.pole).norm() <= TOL_AXIS * scale.max(t.pole.norm())),
        };
        if bad {
            return Err(Error::SingularityOnSpectrum { point: z });
        }
        let v = self.eval(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::SingularityOnSpectrum { point: z });
        }
        Ok(v)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        match &self.kind {
            FunctionKind::Exp => z.exp(),
            FunctionKind::InvSqrt => -(z * z.sqrt()).inv() * 0.5,
            FunctionKind::Sqrt => z.sqrt().inv() * 0.5,
            FunctionKind::Log1pOverZ => log1p_over_z_derivative(z),
            FunctionKind::InvPower(g) => principal_power(z, -*g - 1.0) * (-*g),
            FunctionKind::Sign => C64::zero(),
            FunctionKind::Inverse => -(z * z).inv(),
            FunctionKind::Rational(r) => r.derivative(z),
            FunctionKind::Custom(c) => match c.derivative {
                Some(d) => d(z),
                None => numeric_derivative(c.value, z),
            },
        }
    }

    /// `f[a, b]`, equal to `f'(a)` when `a == b`.
    pub fn divided_difference(&self, a: C64, b: C64) -> C64 {
        if a == b {
            return self.derivative(a);
        }
        match &self.kind {
            FunctionKind::Exp => b.exp() * exprel(a - b),
            FunctionKind::InvSqrt => {
                let (sa, sb) = (a.sqrt(), b.sqrt());
                -(sa * sb * (sa + sb)).inv()
            }
            FunctionKind::Sqrt => (a.sqrt() + b.sqrt()).inv(),
            FunctionKind::InvPower(g) => {
                let l = a.ln() - b.ln();
                principal_power(b, -*g - 1.0) * (-*g) * exprel(l * (-*g)) / exprel(l)
            }
            FunctionKind::Inverse => -(a * b).inv(),
            FunctionKind::Sign => {
                let (sa, sb) = (sign(a), sign(b));
                if sa == sb {
                    C64::zero()
                } else {
                    (sa - sb) / (a - b)
                }
            }
            FunctionKind::Log1pOverZ => log1p_over_z_divided_difference(a, b),
            FunctionKind::Rational(r) => r.divided_difference(a, b),
            FunctionKind::Custom(c) => {
                let close = (a - b).norm() <= 1e-7 * (1.0 + a.norm() + b.norm());
                if close {
                    let mid = (a + b) * 0.5;
                    match c.derivative {
                        Some(d) => d(mid),
                        None => numeric_derivative(c.value, mid),
                    }
                } else {
                    ((c.value)(a) - (c.value)(b)) / (a - b)
                }
            }
        }
    }

    pub fn is_exp(&self) -> bool {
        matches!(self.kind, FunctionKind::Exp)
    }
}

impl RationalFunction {
    /// Builds `poly + sum terms`; residue vectors may be empty.
    pub fn from_partial_fractions(polynomial: Vec<C64>, terms: Vec<PoleTerm>) -> Self {
        Self { polynomial, terms }
    }

    pub fn polynomial(coeffs: &[C64]) -> Self {
        Self {
            polynomial: coeffs.to_vec(),
            terms: Vec::new(),
        }
    }

    /// Converts `p(z) / q(z)` (ascending coefficients) to partial fractions.
    /// Roots of `q` closer than `1e-8` relative are merged into one pole of
    /// higher multiplicity.
    pub fn from_coefficients(p: &[C64], q: &[C64]) -> Result<Self> {
        let q = trim(q);
        if q.is_empty() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let p = trim(p);
        let dq = q.len() - 1;
        let lead = q[dq];
        // polynomial part by long division
        let mut rem: Vec<C64> = p.to_vec();
        let mut quot = vec![C64::zero(); rem.len().saturating_sub(dq).max(1)];
        while rem.len() > dq && !rem.is_empty() {
            let k = rem.len() - 1 - dq;
            let c = rem[rem.len() - 1] / lead;
            quot[k] = c;
            for (i, qi) in q.iter().enumerate() {
                rem[k + i] -= c * qi;
            }
            rem.pop();
        }
        if dq == 0 {
            return Ok(Self::polynomial(&quot));
        }
        let roots = polynomial_roots(q)?;
        let clusters = cluster_roots(&roots);
        let mut terms = Vec::with_capacity(clusters.len());
        for (s, &(xi, k)) in clusters.iter().enumerate() {
            // Taylor coefficients of rem(z) / (lead prod_{t != s} (z - xi_t)^k_t) at xi
            let mut series = taylor_shift(&rem, xi, k);
            for (t, &(xt, kt)) in clusters.iter().enumerate() {
                if t == s {
                    continue;
                }
                let inv = inverse_power_series(xi - xt, kt, k);
                series = truncated_product(&series, &inv, k);
            }
            let residues: Vec<C64> = (1..=k).map(|j| series[k - j] / lead).collect();
            terms.push(PoleTerm { pole: xi, residues });
        }
        Ok(Self {
            polynomial: quot,
            terms,
        })
    }

    pub fn polynomial_part(&self) -> &[C64] {
        &self.polynomial
    }

    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut v = horner(&self.polynomial, z);
        for t in &self.terms {
            let inv = (z - t.pole).inv();
            let mut pw = inv;
            for r in &t.residues {
                v += r * pw;
                pw *= inv;
            }
        }
        v
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let mut v = C64::zero();
        for (k, c) in self.polynomial.iter().enumerate().skip(1) {
            v += c * z.powu(k as u32 - 1) * (k as f64);
        }
        for t in &self.terms {
            let inv = (z - t.pole).inv();
            let mut pw = inv * inv;
            for (j, r) in t.residues.iter().enumerate() {
                v -= r * pw * ((j + 1) as f64);
                pw *= inv;
            }
        }
        v
    }

    pub fn divided_difference(&self, a: C64, b: C64) -> C64 {
        let mut v = C64::zero();
        // sum_i a^i b^(k-1-i)
        let mut h = C64::zero();
        let mut apow = C64::one();
        for c in self.polynomial.iter().skip(1) {
            h = h * b + apow;
            apow *= a;
            v += c * h;
        }
        for t in &self.terms {
            let ia = (a - t.pole).inv();
            let ib = (b - t.pole).inv();
            // -(sum_{k=0}^{j-1} ia^(j-k) ib^(k+1))
            let mut s = C64::zero();
            let mut ibpow = C64::one();
            for r in &t.residues {
                s = (s + ibpow) * ia;
                ibpow *= ib;
                v -= r * s * ib;
            }
        }
        v
    }
}

fn trim(c: &[C64]) -> &[C64] {
    let mut n = c.len();
    while n > 0 && c[n - 1].is_zero() {
        n -= 1;
    }
    &c[..n]
}

fn horner(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::zero(), |acc, ci| acc * z + ci)
}

/// Roots of a polynomial (ascending coefficients, nonzero leading) as
/// eigenvalues of its companion matrix.
pub fn polynomial_roots(q: &[C64]) -> Result<Vec<C64>> {
    let q = trim(q);
    let d = q.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = q[d];
    let comp = DenseMatrix::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -q[i] / lead
        } else if i == j + 1 {
            C64::one()
        } else {
            C64::zero()
        }
    });
    Ok(schur(&comp)?.eigenvalues())
}

fn cluster_roots(roots: &[C64]) -> Vec<(C64, usize)> {
    let scale = roots.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let mut out: Vec<(C64, usize, C64)> = Vec::new();
    for &r in roots {
        if let Some(c) = out.iter_mut().find(|c| (c.0 - r).norm() <= 1e-8 * scale) {
            c.1 += 1;
            c.2 += r;
            c.0 = c.2 / (c.1 as f64);
        } else {
            out.push((r, 1, r));
        }
    }
    out.into_iter().map(|(z, k, _)| (z, k)).collect()
}

/// First `len` Taylor coefficients of `p(xi + h)`.
fn taylor_shift(p: &[C64], xi: C64, len: usize) -> Vec<C64> {
    let mut c = p.to_vec();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        // synthetic division by (z - xi): remainder is the next coefficient
        let n = c.len();
        if n == 0 {
            out.push(C64::zero());
            continue;
        }
        let mut q = vec![C64::zero(); n.saturating_sub(1)];
        let mut acc = C64::zero();
        for i in (0..n).rev() {
            acc = acc * xi + c[i];
            if i > 0 {
                q[i - 1] = acc;
            }
        }
        out.push(acc);
        c = q;
    }
    out
}

/// Series of `(delta + h)^(-k)` up to `h^(len-1)`.
fn inverse_power_series(delta: C64, k: usize, len: usize) -> Vec<C64> {
    let base = delta.powi(-(k as i32));
    let mut out = Vec::with_capacity(len);
    let mut coeff = C64::one();
    for i in 0..len {
        out.push(base * coeff);
        // binom(-k, i+1) / binom(-k, i) = (-k - i) / (i + 1)
        coeff = coeff * (-(k as f64) - i as f64) / ((i + 1) as f64) / delta;
    }
    out
}

fn truncated_product(a: &[C64], b: &[C64], len: usize) -> Vec<C64> {
    (0..len)
        .map(|i| (0..=i).map(|j| a[j] * b[i - j]).sum())
        .collect()
}

fn sign(z: C64) -> C64 {
    if z.re >= 0.0 {
        C64::one()
    } else {
        -C64::one()
    }
}

fn principal_power(z: C64, p: f64) -> C64 {
    if z.is_zero() {
        return if p > 0.0 {
            C64::zero()
        } else {
            C64::new(f64::INFINITY, 0.0)
        };
    }
    (z.ln() * p).exp()
}

/// `(e^h - 1) / h`
pub fn exprel(h: C64) -> C64 {
    if h.norm() < 0.5 {
        let mut term = C64::one();
        let mut sum = C64::one();
        for k in 2..30 {
            term = term * h / (k as f64);
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (h.exp() - 1.0) / h
    }
}

/// `log(1 + z)` without cancellation for small `z`.
pub fn log1p(z: C64) -> C64 {
    let u = z + 1.0;
    if u == C64::one() {
        z
    } else {
        u.ln() * z / (u - 1.0)
    }
}

fn log1p_over_z(z: C64) -> C64 {
    if z.norm() < 0.1 {
        series(z, |k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            s / (k + 1) as f64
        })
    } else {
        log1p(z) / z
    }
}

fn log1p_over_z_derivative(z: C64) -> C64 {
    if z.norm() < 0.1 {
        // d/dz sum (-1)^k z^k/(k+1)
        series(z, |k| {
            let kk = k + 1;
            let s = if kk % 2 == 0 { 1.0 } else { -1.0 };
            s * kk as f64 / (kk + 1) as f64
        })
    } else {
        (z / (z + 1.0) - log1p(z)) / (z * z)
    }
}

fn log1p_over_z_divided_difference(a: C64, b: C64) -> C64 {
    let big = a.norm().max(b.norm());
    if (a - b).norm() >= 0.25 * (a.norm() + b.norm()) {
        return (log1p_over_z(a) - log1p_over_z(b)) / (a - b);
    }
    if big < 0.1 {
        // sum_{k>=1} c_k h_k(a, b), c_k = (-1)^k/(k+1)
        let mut v = C64::zero();
        let mut h = C64::zero();
        let mut apow = C64::one();
        for k in 1..40 {
            h = h * b + apow;
            apow *= a;
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            v += h * (s / (k + 1) as f64);
        }
        return v;
    }
    let t = (a - b) / (b + 1.0);
    let lt = if t.norm() < 0.1 {
        log1p_over_z(t)
    } else {
        log1p(t) / t
    };
    (b * lt / (b + 1.0) - log1p(b)) / (a * b)
}

/// `sum_k c(k) z^k` for small `|z|` (40 terms).
fn series(z: C64, c: impl Fn(usize) -> f64) -> C64 {
    let mut v = C64::zero();
    let mut pw = C64::one();
    for k in 0..40 {
        v += pw * c(k);
        pw *= z;
    }
    v
}

fn numeric_derivative(f: fn(C64) -> C64, z: C64) -> C64 {
    let h = 1e-5 * (1.0 + z.norm());
    (f(z + h) - f(z - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn divided_differences_match_plain_quotient_far_apart() {
        let a = C64::new(0.7, 0.2);
        let b = C64::new(2.5, -0.4);
        let r = RationalFunction::from_partial_fractions(
            vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(-0.5, 0.0)],
            vec![PoleTerm {
                pole: C64::new(-1.0, 1.0),
                residues: vec![C64::new(0.3, 0.0), C64::new(0.0, -1.2), C64::new(2.0, 0.0)],
            }],
        );
        for f in [
            FunctionSpec::exp(),
            FunctionSpec::inv_sqrt(),
            FunctionSpec::sqrt(),
            FunctionSpec::log1p_over_z(),
            FunctionSpec::inv_power(0.25),
            FunctionSpec::inverse(),
            FunctionSpec::rational(r),
        ] {
            let plain = (f.eval(a) - f.eval(b)) / (a - b);
            assert!(
                close(f.divided_difference(a, b), plain, 1e-13),
                "{:?}",
                f.kind()
            );
        }
    }

    #[test]
    fn divided_differences_tend_to_derivative() {
        let a = C64::new(0.8, 0.1);
        let b = a + C64::new(1e-9, 1e-9);
        let r = RationalFunction::from_partial_fractions(
            vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(0.25, 0.0)],
            vec![PoleTerm {
                pole: C64::new(-2.0, 0.0),
                residues: vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.5)],
            }],
        );
        for f in [
            FunctionSpec::exp(),
            FunctionSpec::inv_sqrt(),
            FunctionSpec::sqrt(),
            FunctionSpec::log1p_over_z(),
            FunctionSpec::inv_power(0.75),
            FunctionSpec::inverse(),
            FunctionSpec::rational(r),
        ] {
            assert!(
                close(f.divided_difference(a, b), f.derivative(a), 1e-8),
                "{:?}",
                f.kind()
            );
        }
        // and the derivative agrees with a central difference
        let f = FunctionSpec::log1p_over_z();
        for z in [C64::new(0.05, 0.0), C64::new(3.0, 1.0)] {
            let h = 1e-6;
            let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
            assert!(close(f.derivative(z), fd, 1e-8));
        }
    }

    #[test]
    fn coefficients_to_partial_fractions() {
        // (z^3 + 2) / ((z + 1)^2 (z - 3))
        let p = [C64::new(2.0, 0.0), C64::zero(), C64::zero(), C64::one()];
        // (z^2 + 2z + 1)(z - 3) = z^3 - z^2 - 5z - 3
        let q = [
            C64::new(-3.0, 0.0),
            C64::new(-5.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::one(),
        ];
        let r = RationalFunction::from_coefficients(&p, &q).unwrap();
        assert_eq!(r.terms().len(), 2);
        for z in [
            C64::new(0.3, 0.7),
            C64::new(-4.0, 0.1),
            C64::new(10.0, -2.0),
        ] {
            let direct = horner(&p, z) / horner(&q, z);
            assert!(close(r.eval(z), direct, 1e-7), "{z}");
        }
    }

    #[test]
    fn singularity_checks() {
        assert!(FunctionSpec::sign().eval_checked(C64::zero(), 1.0).is_err());
        assert!(FunctionSpec::inv_sqrt()
            .eval_checked(C64::new(-1.0, 0.0), 1.0)
            .is_err());
        assert!(FunctionSpec::log1p_over_z()
            .eval_checked(C64::new(-0.5, 0.0), 1.0)
            .is_ok());
        assert!(FunctionSpec::log1p_over_z()
            .eval_checked(C64::new(-1.5, 0.0), 1.0)
            .is_err());
        assert!(FunctionSpec::exp()
            .eval_checked(C64::new(700.0, 0.0), 1.0)
            .is_ok());
    }

    #[test]
    fn markov_catalog_supports() {
        assert_eq!(
            FunctionSpec::inv_sqrt().markov_support(),
            Some((f64::NEG_INFINITY, 0.0))
        );
        assert_eq!(
            FunctionSpec::log1p_over_z().markov_support(),
            Some((f64::NEG_INFINITY, -1.0))
        );
        assert!(FunctionSpec::exp().markov_support().is_none());
        assert!(FunctionSpec::exp().with_markov_support(1.0, 0.0).is_err());
    }
}
