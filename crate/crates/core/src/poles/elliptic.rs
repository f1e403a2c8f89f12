//! Complete elliptic integrals and Jacobi elliptic functions by the
//! arithmetic-geometric mean with descending Landen transformations.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const MAX_AGM: usize = 64;

/// Modulus `k` together with its complement `k' = sqrt(1 - k^2)`, stored
/// separately so that either may be tiny without cancellation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticParameters {
    k: f64,
    kp: f64,
    big_k: f64,
    big_kp: f64,
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..MAX_AGM {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

impl EllipticParameters {
    pub fn from_modulus(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::InvalidArgument(alloc::format!(
                "elliptic modulus {k} outside [0, 1)"
            )));
        }
        Self::build(k, ((1.0 - k) * (1.0 + k)).sqrt())
    }

    /// Parameters from the complementary modulus `k'`, accurate when `k` is
    /// close to one.
    pub fn from_complement(kp: f64) -> Result<Self> {
        if !(kp > 0.0 && kp <= 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "complementary modulus {kp} outside (0, 1]"
            )));
        }
        Self::build(((1.0 - kp) * (1.0 + kp)).sqrt(), kp)
    }

    fn build(k: f64, kp: f64) -> Result<Self> {
        let big_k = FRAC_PI_2 / agm(1.0, kp);
        let big_kp = if k > 0.0 {
            FRAC_PI_2 / agm(1.0, k)
        } else {
            f64::INFINITY
        };
        Ok(Self {
            k,
            kp,
            big_k,
            big_kp,
        })
    }

    pub fn modulus(&self) -> f64 {
        self.k
    }

    pub fn complement(&self) -> f64 {
        self.kp
    }

    /// `K(k)`
    pub fn k_complete(&self) -> f64 {
        self.big_k
    }

    /// `K'(k) = K(k')`
    pub fn kp_complete(&self) -> f64 {
        self.big_kp
    }

    /// `(sn, cn, dn)(u; k)` for real `u`. Arguments in `(K/2, K]` go through
    /// the quarter-period shift so that `cn` keeps full relative accuracy.
    pub fn sn_cn_dn(&self, u: f64) -> (f64, f64, f64) {
        if self.k == 0.0 {
            return (u.sin(), u.cos(), 1.0);
        }
        let kk = self.big_k;
        if u > 0.5 * kk && u <= kk {
            let (s, c, d) = self.landen(kk - u);
            return (c / d, self.kp * s / d, self.kp / d);
        }
        self.landen(u)
    }

    fn landen(&self, u: f64) -> (f64, f64, f64) {
        let mut a = Vec::with_capacity(16);
        let mut c = Vec::with_capacity(16);
        let (mut an, mut bn) = (1.0f64, self.kp);
        a.push(an);
        c.push(self.k);
        for _ in 0..MAX_AGM {
            let cn = 0.5 * (an - bn);
            let next = 0.5 * (an + bn);
            bn = (an * bn).sqrt();
            an = next;
            a.push(an);
            c.push(cn);
            if cn.abs() <= 1e-16 * an {
                break;
            }
        }
        let n = a.len() - 1;
        let mut phi = 2f64.powi(n as i32) * a[n] * u;
        let mut prev = phi;
        for j in (1..=n).rev() {
            prev = phi;
            phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
        }
        let (s, co) = (phi.sin(), phi.cos());
        let dn = co / (prev - phi).cos();
        (s, co, dn)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn complete_integral_series() {
        // K(k) = pi/2 (1 + k^2/4 + 9 k^4/64 + 25 k^6 / 256 + ...)
        let k = 0.05f64;
        let k2 = k * k;
        let series = PI / 2.0
            * (1.0
                + k2 / 4.0
                + 9.0 * k2 * k2 / 64.0
                + 25.0 * k2 * k2 * k2 / 256.0
                + 1225.0 * k2.powi(4) / 16384.0);
        let p = EllipticParameters::from_modulus(k).unwrap();
        assert!((p.k_complete() - series).abs() < 1e-12);
    }

    #[test]
    fn special_values() {
        for k in [0.0, 0.3, 0.9, 0.999999] {
            let p = EllipticParameters::from_modulus(k).unwrap();
            let (s0, c0, d0) = p.sn_cn_dn(0.0);
            assert!(s0.abs() < 1e-15 && (c0 - 1.0).abs() < 1e-15 && (d0 - 1.0).abs() < 1e-15);
            let (s, c, d) = p.sn_cn_dn(p.k_complete());
            assert!((s - 1.0).abs() < 1e-12, "k={k} sn(K)={s}");
            assert!(c.abs() < 1e-6);
            assert!((d - p.complement()).abs() < 1e-6);
        }
    }

    #[test]
    fn pythagorean_identities() {
        let p = EllipticParameters::from_complement(1e-3).unwrap();
        for u in [0.1, 1.0, 2.5, p.k_complete() * 0.7] {
            let (s, c, d) = p.sn_cn_dn(u);
            assert!((s * s + c * c - 1.0).abs() < 1e-13);
            assert!((d * d + p.modulus().powi(2) * s * s - 1.0).abs() < 1e-13);
        }
    }
}
