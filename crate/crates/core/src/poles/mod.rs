//! Pole selection: the single optimal pole for Markov functions,
//! quasi-optimal pole sets from Zolotarev's construction, Zolotarev poles for
//! the sign function and inverse square root, poles for the exponential, the
//! extended Krylov pattern and Leja ordering.
//!
//! For the exponential the spectrum is assumed shifted into `(-inf, 0]`; a
//! shift by `lambda_max` multiplies bounds by `exp(lambda_max)`. The rate
//! constant of the optimal exponential poles, about 9.28903, is only quoted
//! as [`EXP_OPTIMAL_RATE`].

mod elliptic;
mod maps;

pub use elliptic::EllipticParameters;
pub use maps::{EllipseMap, IntervalMap};

use alloc::vec::Vec;
use core::cmp::Ordering as CmpOrdering;

use crate::arnoldi::{Ordering, Pole, PolePlan};
use crate::bounds::SpectralWindow;
use crate::dense::C64;
use crate::error::{Error, Result};

/// Asymptotic convergence factor `1/kappa` of the best rational
/// approximations to `exp` on `(-inf, 0]`, with `kappa` about 9.28903.
pub const EXP_OPTIMAL_RATE: f64 = 1.0 / 9.289_025_491_920_818;

/// Single pole and per-step rate `1/|y_opt|` for a Markov function with
/// support `[alpha, beta]` (`alpha` may be `-inf`) on the window.
pub fn markov_single_pole(window: &SpectralWindow, support: (f64, f64)) -> Result<(Pole, f64)> {
    let (alpha, beta) = support;
    let (lmin, lmax) = (window.lambda_min(), window.lambda_max());
    if !(beta < lmin) {
        return Err(Error::SupportOverlapsSpectrum { beta, omega: lmin });
    }
    if !(alpha < beta) {
        return Err(Error::InvalidArgument(alloc::format!(
            "support needs alpha < beta, got ({alpha}, {beta})"
        )));
    }
    if lmin == lmax {
        return Ok((
            Pole::real(mobius_geometric_mean(alpha, beta, lmin, lmax)),
            0.0,
        ));
    }
    let map = IntervalMap::new(lmin, lmax)?;
    let pb = map.phi_real(beta);
    let (y, w) = if alpha == f64::NEG_INFINITY {
        let y = pb - ((pb - 1.0) * (pb + 1.0)).sqrt();
        (y, y)
    } else {
        let pa = map.phi_real(alpha);
        let sigma = (pb - pa) / (pb * pa - 1.0);
        let is = 1.0 / sigma;
        let y = -is - ((is - 1.0) * (is + 1.0)).sqrt();
        (y, (1.0 + pa * y) / (pa + y))
    };
    let xi = map.psi_real(w);
    Ok((Pole::real(xi), 1.0 / y.abs()))
}

/// The point `beta - sqrt((lmin - beta)(lmax - beta))`, transported by the
/// Möbius map sending `alpha` to infinity when `alpha` is finite.
fn mobius_geometric_mean(alpha: f64, beta: f64, lmin: f64, lmax: f64) -> f64 {
    let (tmin, tmax) = (mobius(alpha, beta, lmin), mobius(alpha, beta, lmax));
    mobius_inverse(alpha, beta, -(tmin * tmax).sqrt())
}

/// `T(z) = (z - beta) / (z - alpha)` scaled so that `T(z) ~ z - beta` when
/// `alpha = -inf`.
pub(crate) fn mobius(alpha: f64, beta: f64, z: f64) -> f64 {
    if alpha == f64::NEG_INFINITY {
        z - beta
    } else {
        (z - beta) / (z - alpha)
    }
}

fn mobius_inverse(alpha: f64, beta: f64, w: f64) -> f64 {
    if alpha == f64::NEG_INFINITY {
        w + beta
    } else {
        (beta - alpha * w) / (1.0 - w)
    }
}

/// `c_i = l^2 sn^2(i K'/(2r); l') / cn^2(i K'/(2r); l')` for `i = 1..2r-1`,
/// returned with index `i - 1`. Uses `c_i c_{2r-i} = l^2` for the upper half.
pub fn zolotarev_coefficients(l: f64, r: usize) -> Result<Vec<f64>> {
    if !(l > 0.0 && l <= 1.0) || r == 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "Zolotarev needs 0 < l <= 1 and r >= 1 (got {l}, {r})"
        )));
    }
    let p = EllipticParameters::from_complement(l)?;
    let kk = p.k_complete();
    let mut c = alloc::vec![0.0; 2 * r - 1];
    for i in 1..=r {
        let (s, cn, _) = p.sn_cn_dn(i as f64 * kk / (2 * r) as f64);
        c[i - 1] = if i == r {
            l
        } else {
            l * l * (s / cn) * (s / cn)
        };
    }
    for i in r + 1..2 * r {
        c[i - 1] = l * l / c[2 * r - i - 1];
    }
    Ok(c)
}

/// Zolotarev rational approximation `x R(x^2)` of `sign(x)` on
/// `[-b, -a] ∪ [a, b]`, of type `(2r - 1, 2r)`, with its uniform relative
/// error.
#[derive(Clone, Debug)]
pub struct ZolotarevSign {
    b: f64,
    scale: f64,
    numer: Vec<f64>,
    denom: Vec<f64>,
    error: f64,
}

impl ZolotarevSign {
    pub fn new(gap: (f64, f64), r: usize) -> Result<Self> {
        let (a, b) = gap;
        if !(a > 0.0 && a <= b && b.is_finite()) {
            return Err(Error::InvalidGap { a, b });
        }
        let l = a / b;
        let c = zolotarev_coefficients(l, r)?;
        let numer: Vec<f64> = (1..r).map(|j| c[2 * j - 1]).collect();
        let denom: Vec<f64> = (1..=r).map(|j| c[2 * j - 2]).collect();
        let mut z = Self {
            b,
            scale: 1.0,
            numer,
            denom,
            error: 0.0,
        };
        // equioscillation fixes the scale: min and max of x R(x^2) on [l, 1]
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let samples = 4000;
        for k in 0..=samples {
            let t = k as f64 / samples as f64;
            let x = l.powf(1.0 - t);
            let g = z.unscaled(x);
            lo = lo.min(g);
            hi = hi.max(g);
        }
        z.scale = 2.0 / (lo + hi);
        z.error = (hi - lo) / (hi + lo);
        Ok(z)
    }

    fn unscaled(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut v = x;
        for c in &self.numer {
            v *= x2 + c;
        }
        for c in &self.denom {
            v /= x2 + c;
        }
        v
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.scale * self.unscaled(x / self.b)
    }

    /// Uniform relative error on the gap.
    pub fn error(&self) -> f64 {
        self.error
    }

    /// Poles `±i b sqrt(c_{2j-1})`.
    pub fn sign_poles(&self) -> Vec<Pole> {
        let mut out = Vec::with_capacity(2 * self.denom.len());
        for c in &self.denom {
            let y = self.b * c.sqrt();
            out.push(Pole::Finite(C64::new(0.0, y)));
            out.push(Pole::Finite(C64::new(0.0, -y)));
        }
        out
    }

    /// Poles `-b^2 c_{2j-1}` of the induced approximation of `t^{-1/2}` on
    /// `[a^2, b^2]`.
    pub fn inv_sqrt_poles(&self) -> Vec<Pole> {
        self.denom
            .iter()
            .map(|c| Pole::real(-self.b * self.b * c))
            .collect()
    }
}

/// Conjugate pairs `±i b sqrt(c_{2j-1})`, `j = 1..degree`.
pub fn zolotarev_sign_poles(gap: (f64, f64), degree: usize) -> Result<PolePlan> {
    Ok(PolePlan::new(ZolotarevSign::new(gap, degree)?.sign_poles()))
}

/// The `degree` real poles of the Zolotarev approximation of `t^{-1/2}` on
/// `[a^2, b^2]`.
pub fn zolotarev_inv_sqrt_poles(gap: (f64, f64), degree: usize) -> Result<PolePlan> {
    Ok(PolePlan::new(
        ZolotarevSign::new(gap, degree)?.inv_sqrt_poles(),
    ))
}

/// `m` distinct real poles for Markov functions with support `[alpha, beta]`,
/// ascending. With `T` the Möbius map fixing the configuration
/// (`alpha -> inf`, `beta -> 0`) they are `T^{-1}(-T(lmax) c_{2j-1})` with
/// modulus `sqrt(T(lmin) / T(lmax))`.
pub fn quasi_optimal_poles(
    window: &SpectralWindow,
    support: (f64, f64),
    m: usize,
) -> Result<PolePlan> {
    let (alpha, beta) = support;
    let (lmin, lmax) = (window.lambda_min(), window.lambda_max());
    if !(beta < lmin) {
        return Err(Error::SupportOverlapsSpectrum { beta, omega: lmin });
    }
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one pole".into()));
    }
    let (tmin, tmax) = (mobius(alpha, beta, lmin), mobius(alpha, beta, lmax));
    let c = zolotarev_coefficients((tmin / tmax).sqrt(), m)?;
    let mut poles: Vec<f64> = (1..=m)
        .map(|j| mobius_inverse(alpha, beta, -tmax * c[2 * j - 2]))
        .collect();
    poles.sort_by(|x, y| x.partial_cmp(y).unwrap_or(CmpOrdering::Equal));
    Ok(PolePlan::new(poles.into_iter().map(Pole::real).collect()))
}

/// `m/sqrt(2)` repeated `m` times.
pub fn exp_single_pole(m: usize) -> Result<PolePlan> {
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one pole".into()));
    }
    let xi = m as f64 / core::f64::consts::SQRT_2;
    Ok(PolePlan::new(alloc::vec![Pole::real(xi); m]))
}

/// `0, inf, 0, inf, ...` of length `m`.
pub fn extended_plan(m: usize) -> Result<PolePlan> {
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one pole".into()));
    }
    Ok(PolePlan::new(
        (0..m)
            .map(|j| {
                if j % 2 == 0 {
                    Pole::real(0.0)
                } else {
                    Pole::Infinite
                }
            })
            .collect(),
    ))
}

fn tie_order(a: C64, b: C64) -> CmpOrdering {
    a.im.partial_cmp(&b.im)
        .unwrap_or(CmpOrdering::Equal)
        .then(a.re.partial_cmp(&b.re).unwrap_or(CmpOrdering::Equal))
}

fn nearly_equal(x: f64, y: f64) -> bool {
    x == y || (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0)
}

/// Greedy Leja ordering of the finite poles: largest modulus first, then each
/// pole maximizing the product of distances to those already chosen. Ties go
/// to the smaller imaginary part, then the smaller real part. Infinite poles
/// are appended at the end.
pub fn leja_order(poles: &[Pole]) -> Result<PolePlan> {
    if poles.is_empty() {
        return Err(Error::InvalidArgument("empty pole set".into()));
    }
    let mut rest: Vec<C64> = poles.iter().filter_map(|p| p.finite()).collect();
    let infinite = poles.len() - rest.len();
    let mut out: Vec<Pole> = Vec::with_capacity(poles.len());
    let mut chosen: Vec<C64> = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let score = |z: C64| -> f64 {
            if chosen.is_empty() {
                z.norm()
            } else {
                chosen.iter().map(|c| (z - c).norm().ln()).sum()
            }
        };
        let mut best = 0usize;
        let mut best_score = score(rest[0]);
        for (i, &z) in rest.iter().enumerate().skip(1) {
            let s = score(z);
            let better = if nearly_equal(s, best_score) {
                tie_order(z, rest[best]) == CmpOrdering::Less
            } else {
                s > best_score
            };
            if better {
                best = i;
                best_score = s;
            }
        }
        let z = rest.remove(best);
        chosen.push(z);
        out.push(Pole::Finite(z));
    }
    out.extend(std::iter::repeat_n(Pole::Infinite, infinite));
    Ok(PolePlan::new(out).with_ordering(Ordering::Leja))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arnoldi::Repetition;

    fn window(a: f64, b: f64) -> SpectralWindow {
        SpectralWindow::interval(a, b).unwrap()
    }

    #[test]
    fn single_pole_closed_form() {
        let (p, rate) =
            markov_single_pole(&window(1e-3, 1.0078e4), (f64::NEG_INFINITY, 0.0)).unwrap();
        let xi = p.finite().unwrap().re;
        let want = -(1e-3f64 * 1.0078e4).sqrt();
        assert!((xi - want).abs() <= 1e-10 * want.abs());
        assert!((xi + 3.1746).abs() < 1e-4);
        let q = (1.0078e7f64).powf(0.25);
        assert!((rate - (q - 1.0) / (q + 1.0)).abs() < 1e-10);
        assert!((rate - 0.9651).abs() < 1e-4);
        let (p, _) = markov_single_pole(&window(1.0, 1.0), (f64::NEG_INFINITY, 0.0)).unwrap();
        assert_eq!(p, Pole::real(-1.0));
        assert!(matches!(
            markov_single_pole(&window(1.0, 2.0), (f64::NEG_INFINITY, 1.0)),
            Err(Error::SupportOverlapsSpectrum { .. })
        ));
    }

    #[test]
    fn finite_alpha_single_pole_lies_in_gap() {
        let (p, rate) = markov_single_pole(&window(1.0, 50.0), (-3.0, 0.0)).unwrap();
        let xi = p.finite().unwrap().re;
        assert!(xi > -3.0 && xi < 0.0);
        assert!(rate > 0.0 && rate < 1.0);
        // as alpha -> -inf the general chain tends to the closed form
        let (p, _) = markov_single_pole(&window(1.0, 50.0), (-1e12, 0.0)).unwrap();
        assert!((p.finite().unwrap().re + 50f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn quasi_optimal_single_pole_consistent() {
        let w = window(1e-3, 1.0078e4);
        let plan = quasi_optimal_poles(&w, (f64::NEG_INFINITY, 0.0), 1).unwrap();
        let (p, _) = markov_single_pole(&w, (f64::NEG_INFINITY, 0.0)).unwrap();
        let a = plan.poles()[0].finite().unwrap().re;
        let b = p.finite().unwrap().re;
        assert!((a - b).abs() <= 0.1 * b.abs());
    }

    #[test]
    fn quasi_optimal_log_symmetry() {
        let (lmin, lmax) = (1e-3, 1.0078e4);
        let plan = quasi_optimal_poles(&window(lmin, lmax), (f64::NEG_INFINITY, 0.0), 10).unwrap();
        let p: Vec<f64> = plan
            .poles()
            .iter()
            .map(|x| -x.finite().unwrap().re)
            .collect();
        assert!(p.iter().all(|&x| x > 0.0));
        let g = (lmin * lmax).sqrt();
        for i in 0..p.len() {
            let prod = p[i] * p[p.len() - 1 - i];
            assert!((prod - g * g).abs() <= 1e-10 * g * g);
        }
        assert!(p.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn zolotarev_symmetric_case_and_closure() {
        let plan = zolotarev_sign_poles((1.0, 1.0), 1).unwrap();
        let p: Vec<C64> = plan.poles().iter().map(|x| x.finite().unwrap()).collect();
        assert!((p[0] - C64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((p[1] - C64::new(0.0, -1.0)).norm() < 1e-14);
        let plan = zolotarev_sign_poles((1e-2, 1.0), 10).unwrap();
        assert!(plan.is_conjugate_closed());
        assert!(plan.poles().iter().all(|p| p.finite().unwrap().re == 0.0));
    }

    #[test]
    fn zolotarev_sign_accuracy() {
        let z = ZolotarevSign::new((1e-2, 1.0), 10).unwrap();
        let mut worst = 0.0f64;
        for k in 0..10_000 {
            let x = 1e-2 + (1.0 - 1e-2) * k as f64 / 9_999.0;
            worst = worst.max((z.eval(x) - 1.0).abs());
        }
        assert!(worst < 1e-6, "sup error {worst}");
        assert!((worst - z.error()).abs() <= 0.05 * z.error());
        let inv = zolotarev_inv_sqrt_poles((1e-2, 1.0), 10).unwrap();
        let sg = zolotarev_sign_poles((1e-2, 1.0), 10).unwrap();
        for (q, s) in inv.poles().iter().zip(sg.poles().iter().step_by(2)) {
            let s = s.finite().unwrap();
            assert!((q.finite().unwrap() - s * s).norm() < 1e-12);
        }
    }

    #[test]
    fn exp_and_extended_plans() {
        let p = exp_single_pole(1).unwrap();
        assert!(
            (p.poles()[0].finite().unwrap().re - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15
        );
        let p = exp_single_pole(10).unwrap();
        assert_eq!(p.len(), 10);
        assert!(p
            .poles()
            .iter()
            .all(|x| (x.finite().unwrap().re - 7.0710678118654755).abs() < 1e-14));
        assert_eq!(extended_plan(1).unwrap().poles(), [Pole::real(0.0)]);
        assert_eq!(
            extended_plan(4).unwrap().poles(),
            [
                Pole::real(0.0),
                Pole::Infinite,
                Pole::real(0.0),
                Pole::Infinite
            ]
        );
        assert_eq!(extended_plan(3).unwrap().repetition(), Repetition::AsGiven);
    }

    #[test]
    fn leja_examples() {
        assert_eq!(
            leja_order(&[Pole::real(-2.0)]).unwrap().poles(),
            [Pole::real(-2.0)]
        );
        let p = leja_order(&[Pole::real(-1.0), Pole::real(-4.0), Pole::real(-2.0)]).unwrap();
        assert_eq!(
            p.poles(),
            [Pole::real(-4.0), Pole::real(-1.0), Pole::real(-2.0)]
        );
        assert_eq!(p.ordering(), Ordering::Leja);
        let z = zolotarev_sign_poles((1e-2, 1.0), 4).unwrap();
        let l = leja_order(z.poles()).unwrap();
        let mut a: Vec<(f64, f64)> = z
            .poles()
            .iter()
            .map(|p| (p.finite().unwrap().re, p.finite().unwrap().im))
            .collect();
        let mut b: Vec<(f64, f64)> = l
            .poles()
            .iter()
            .map(|p| (p.finite().unwrap().re, p.finite().unwrap().im))
            .collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(a, b);
        assert!(l.poles()[0].finite().unwrap().im < 0.0);
    }
}
