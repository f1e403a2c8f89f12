//! A priori error bounds: the Blaschke factor `eta_m`, Markov-function
//! bounds for Hermitian and non-Hermitian updates, the polynomial Krylov
//! bound, the Fréchet perturbation bound and the `z f(z)` modification.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::arnoldi::{Pole, PolePlan};
use crate::dense::{hermitian_eigen, DenseMatrix, C64};
use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::poles::{mobius, EllipseMap, IntervalMap};

/// Default number of samples for the maximization in [`eta_blaschke`].
pub const DEFAULT_ETA_SAMPLES: usize = 4096;

const GOLDEN_STEPS: usize = 80;
const SUP_SAMPLES: usize = 2049;

/// `(1 + sqrt 2)^2`
pub const CROUZEIX_CONSTANT: f64 = (1.0 + SQRT_2) * (1.0 + SQRT_2);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WindowKind {
    Interval,
    /// Ellipse symmetric about the real axis, semi-axes along the axes.
    Ellipse {
        center: f64,
        semi_re: f64,
        semi_im: f64,
    },
}

/// Real interval, or ellipse stub, containing the spectra (numerical ranges)
/// of `A` and `A + D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralWindow {
    lambda_min: f64,
    lambda_max: f64,
    omega: f64,
    kind: WindowKind,
}

/// Exterior conformal map `phi` of a window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WindowMap {
    Interval(IntervalMap),
    Ellipse(EllipseMap),
}

impl WindowMap {
    pub fn phi(&self, z: C64) -> C64 {
        match self {
            WindowMap::Interval(m) => m.phi(z),
            WindowMap::Ellipse(m) => m.phi(z),
        }
    }

    /// `phi` at a real point left of the window.
    pub fn phi_real(&self, x: f64) -> f64 {
        match self {
            WindowMap::Interval(m) => m.phi_real(x),
            WindowMap::Ellipse(m) => m.phi(C64::new(x, 0.0)).re,
        }
    }
}

impl SpectralWindow {
    pub fn interval(lambda_min: f64, lambda_max: f64) -> Result<Self> {
        if !(lambda_min <= lambda_max) || !lambda_min.is_finite() || !lambda_max.is_finite() {
            return Err(Error::InvalidGap {
                a: lambda_min,
                b: lambda_max,
            });
        }
        Ok(Self {
            lambda_min,
            lambda_max,
            omega: lambda_min,
            kind: WindowKind::Interval,
        })
    }

    pub fn ellipse(center: f64, semi_re: f64, semi_im: f64) -> Result<Self> {
        EllipseMap::new(center, semi_re, semi_im)?;
        Ok(Self {
            lambda_min: center - semi_re,
            lambda_max: center + semi_re,
            omega: center - semi_re,
            kind: WindowKind::Ellipse {
                center,
                semi_re,
                semi_im,
            },
        })
    }

    /// Smallest interval holding all given eigenvalues.
    pub fn from_eigenvalues(values: &[f64]) -> Result<Self> {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::interval(lo, hi)
    }

    /// `[min(lmin(A), lmin(A+D)), max(lmax(A), lmax(A+D))]` for Hermitian
    /// `A` and `A + D`.
    pub fn from_hermitian(a: &DenseMatrix, a_plus_d: &DenseMatrix) -> Result<Self> {
        let (mut ev, _) = hermitian_eigen(&a.hermitian_part(), false)?;
        let (ev2, _) = hermitian_eigen(&a_plus_d.hermitian_part(), false)?;
        ev.extend(ev2);
        Self::from_eigenvalues(&ev)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Leftmost real point of the window.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn interval_map(&self) -> Result<IntervalMap> {
        IntervalMap::new(self.lambda_min, self.lambda_max)
    }

    pub fn map(&self) -> Result<WindowMap> {
        Ok(match self.kind {
            WindowKind::Interval => WindowMap::Interval(self.interval_map()?),
            WindowKind::Ellipse {
                center,
                semi_re,
                semi_im,
            } => WindowMap::Ellipse(EllipseMap::new(center, semi_re, semi_im)?),
        })
    }

    /// `max |z|` over the window.
    pub fn max_modulus(&self) -> f64 {
        match self.kind {
            WindowKind::Interval => self.lambda_min.abs().max(self.lambda_max.abs()),
            WindowKind::Ellipse {
                center,
                semi_re,
                semi_im,
            } => boundary(center, semi_re, semi_im)
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        }
    }

    /// `sup |g|` over the window, by sampling (the boundary for ellipses).
    fn sup(&self, g: impl Fn(C64) -> f64) -> f64 {
        match self.kind {
            WindowKind::Interval => (0..SUP_SAMPLES)
                .map(|k| {
                    let t = k as f64 / (SUP_SAMPLES - 1) as f64;
                    g(C64::new(
                        self.lambda_min + t * (self.lambda_max - self.lambda_min),
                        0.0,
                    ))
                })
                .fold(0.0, f64::max),
            WindowKind::Ellipse {
                center,
                semi_re,
                semi_im,
            } => boundary(center, semi_re, semi_im)
                .map(g)
                .fold(0.0, f64::max),
        }
    }
}

fn boundary(center: f64, semi_re: f64, semi_im: f64) -> impl Iterator<Item = C64> {
    (0..SUP_SAMPLES).map(move |k| {
        let t = 2.0 * PI * k as f64 / SUP_SAMPLES as f64;
        C64::new(center + semi_re * t.cos(), semi_im * t.sin())
    })
}

/// Per-`m` bound values (index `m`), the mean per-step rate and the leading
/// constant.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub values: Vec<f64>,
    pub rate: f64,
    pub constant: f64,
    /// Set when the best-approximation error is replaced by a computable proxy.
    pub proxy: bool,
}

impl BoundReport {
    pub fn at(&self, m: usize) -> Option<f64> {
        self.values.get(m).copied()
    }
}

/// Incremental evaluation of `eta_m = max_x 1 / |B_m(x)|` over
/// `x in [phi(alpha), phi(beta)]`, one pole at a time.
#[derive(Clone, Debug)]
pub struct EtaSweep {
    /// `phi(beta)` and, for finite `alpha`, `phi(alpha)`.
    phi_beta: f64,
    phi_alpha: Option<f64>,
    /// Sample parameters in `[0, 1]`, increasing.
    params: Vec<f64>,
    log_inv: Vec<f64>,
    mapped: Vec<Option<C64>>,
    map: WindowMap,
}

impl EtaSweep {
    pub fn new(
        map: WindowMap,
        window: &SpectralWindow,
        support: (f64, f64),
        samples: usize,
    ) -> Result<Self> {
        let (alpha, beta) = support;
        if !(beta < window.omega()) {
            return Err(Error::SupportOverlapsSpectrum {
                beta,
                omega: window.omega(),
            });
        }
        if !(alpha < beta) {
            return Err(Error::InvalidArgument(alloc::format!(
                "support needs alpha < beta, got ({alpha}, {beta})"
            )));
        }
        let samples = samples.max(2);
        let params: Vec<f64> = (0..samples)
            .map(|k| 0.5 - 0.5 * (PI * k as f64 / (samples - 1) as f64).cos())
            .collect();
        Ok(Self {
            phi_beta: map.phi_real(beta),
            phi_alpha: (alpha > f64::NEG_INFINITY).then(|| map.phi_real(alpha)),
            log_inv: alloc::vec![0.0; params.len()],
            params,
            mapped: Vec::new(),
            map,
        })
    }

    pub fn phi_beta(&self) -> f64 {
        self.phi_beta
    }

    /// Sample point for parameter `t`; `None` stands for `x = -inf`.
    fn point(&self, t: f64) -> Option<f64> {
        match self.phi_alpha {
            Some(pa) => Some(pa + t * (self.phi_beta - pa)),
            None => (t > 0.0).then(|| self.phi_beta / t),
        }
    }

    fn factor(x: Option<f64>, phi: Option<C64>) -> f64 {
        match (x, phi) {
            (Some(x), Some(p)) => {
                (C64::new(x, 0.0) - p).norm().ln() - (C64::new(1.0, 0.0) - p.conj() * x).norm().ln()
            }
            (Some(x), None) => -x.abs().ln(),
            (None, Some(p)) => -p.norm().ln(),
            (None, None) => f64::NEG_INFINITY,
        }
    }

    fn log_eval(&self, t: f64) -> f64 {
        let x = self.point(t);
        self.mapped.iter().map(|&p| Self::factor(x, p)).sum()
    }

    pub fn push(&mut self, pole: Pole) -> Result<()> {
        let mapped = match pole {
            Pole::Infinite => None,
            Pole::Finite(z) => {
                let p = self.map.phi(z);
                if !(p.norm() > 1.0 + 1e-12) {
                    return Err(Error::PoleInsideDomain { pole: z });
                }
                Some(p)
            }
        };
        for (i, &t) in self.params.iter().enumerate() {
            self.log_inv[i] += Self::factor(self.point(t), mapped);
        }
        self.mapped.push(mapped);
        Ok(())
    }

    /// Current `eta_m`; one for the empty product.
    pub fn eta(&self) -> f64 {
        if self.mapped.is_empty() {
            return 1.0;
        }
        let (best, mut best_val) =
            self.log_inv
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
                );
        let n = self.params.len();
        let (mut lo, mut hi) = (
            self.params[best.saturating_sub(1)],
            self.params[(best + 1).min(n - 1)],
        );
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - g * (hi - lo);
        let mut d = lo + g * (hi - lo);
        let (mut fc, mut fd) = (self.log_eval(c), self.log_eval(d));
        for _ in 0..GOLDEN_STEPS {
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - g * (hi - lo);
                fc = self.log_eval(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + g * (hi - lo);
                fd = self.log_eval(d);
            }
        }
        best_val = best_val.max(fc).max(fd);
        best_val.exp()
    }
}

/// `eta_m` for the given poles on the window map; `support = (alpha, beta)`
/// with `alpha` possibly `-inf`.
pub fn eta_blaschke(
    poles: &[Pole],
    window: &SpectralWindow,
    support: (f64, f64),
    samples: usize,
) -> Result<f64> {
    let mut sweep = EtaSweep::new(window.map()?, window, support, samples)?;
    for &p in poles {
        sweep.push(p)?;
    }
    Ok(sweep.eta())
}

/// `eta_k` for `k = 0..=m` along the plan.
pub fn eta_sequence(
    plan: &PolePlan,
    window: &SpectralWindow,
    support: (f64, f64),
    m: usize,
    samples: usize,
) -> Result<Vec<f64>> {
    let mut sweep = EtaSweep::new(window.map()?, window, support, samples)?;
    let mut out = Vec::with_capacity(m + 1);
    out.push(1.0);
    for pole in plan.expand(m)? {
        sweep.push(pole)?;
        out.push(sweep.eta());
    }
    Ok(out)
}

fn markov_support(f: &FunctionSpec) -> Result<(f64, f64)> {
    f.markov_support().ok_or(Error::NotMarkov)
}

fn mean_rate(etas: &[f64]) -> f64 {
    let m = etas.len().saturating_sub(1);
    if m == 0 {
        1.0
    } else {
        etas[m].powf(1.0 / m as f64)
    }
}

/// Leading factor `2 ||f||_E / |phi(beta)|` of the Markov approximation
/// estimate; `||f||_E` is taken at `omega`.
fn markov_prefactor(window: &SpectralWindow, f: &FunctionSpec, support: (f64, f64)) -> Result<f64> {
    let map = window.map()?;
    let fw = f.eval(C64::new(window.omega(), 0.0)).norm();
    Ok(2.0 * fw / map.phi_real(support.1).abs())
}

/// `4 (2 ||f||_E / |phi(beta)|) eta_k` for `k = 0..=m`, for a Hermitian
/// update with a conjugate-closed plan.
pub fn markov_bound_hermitian(
    window: &SpectralWindow,
    plan: &PolePlan,
    f: &FunctionSpec,
    m: usize,
    samples: usize,
) -> Result<BoundReport> {
    let support = markov_support(f)?;
    if !plan.is_conjugate_closed() {
        return Err(Error::InvalidArgument(
            "Hermitian bound needs a conjugate-closed plan".into(),
        ));
    }
    let etas = eta_sequence(plan, window, support, m, samples)?;
    let constant = 4.0 * markov_prefactor(window, f, support)?;
    Ok(BoundReport {
        values: etas.iter().map(|e| constant * e).collect(),
        rate: mean_rate(&etas),
        constant,
        proxy: false,
    })
}

/// `8 |f'(omega)| eta / (1 - eta) ||B|| ||C||`.
pub fn markov_nonhermitian_value(
    derivative_at_omega: f64,
    eta: f64,
    norm_b: f64,
    norm_c: f64,
) -> Result<f64> {
    if !(eta < 1.0) {
        return Err(Error::EtaNotContracting { eta });
    }
    Ok(8.0 * derivative_at_omega.abs() * eta / (1.0 - eta) * norm_b * norm_c)
}

/// Non-Hermitian Markov bound for `k = 0..=m`; entries with `eta_k >= 1`
/// are infinite, and `eta_m >= 1` is an error.
pub fn markov_bound_nonhermitian(
    window: &SpectralWindow,
    plan: &PolePlan,
    f: &FunctionSpec,
    m: usize,
    norm_b: f64,
    norm_c: f64,
    samples: usize,
) -> Result<BoundReport> {
    let support = markov_support(f)?;
    let etas = eta_sequence(plan, window, support, m, samples)?;
    let dw = f.derivative(C64::new(window.omega(), 0.0)).norm();
    let last = etas[m];
    if !(last < 1.0) {
        return Err(Error::EtaNotContracting { eta: last });
    }
    Ok(BoundReport {
        values: etas
            .iter()
            .map(|&e| markov_nonhermitian_value(dw, e, norm_b, norm_c).unwrap_or(f64::INFINITY))
            .collect(),
        rate: mean_rate(&etas),
        constant: 8.0 * dw * norm_b * norm_c,
        proxy: false,
    })
}

/// Maximum deviation of `g` from its Chebyshev interpolant with `k` nodes on
/// `[a, b]`, sampled; `k = 0` gives `sup |g|`.
fn chebyshev_deviation(g: &dyn Fn(f64) -> C64, a: f64, b: f64, k: usize) -> f64 {
    let samples = (0..SUP_SAMPLES).map(|i| a + (b - a) * i as f64 / (SUP_SAMPLES - 1) as f64);
    if k == 0 {
        return samples.map(|x| g(x).norm()).fold(0.0, f64::max);
    }
    if a == b {
        return 0.0;
    }
    let theta: Vec<f64> = (0..k)
        .map(|j| PI * (2 * j + 1) as f64 / (2 * k) as f64)
        .collect();
    let nodes: Vec<f64> = theta
        .iter()
        .map(|t| 0.5 * (a + b) - 0.5 * (b - a) * t.cos())
        .collect();
    let vals: Vec<C64> = nodes.iter().map(|&x| g(x)).collect();
    let weights: Vec<f64> = theta
        .iter()
        .enumerate()
        .map(|(j, t)| if j % 2 == 0 { t.sin() } else { -t.sin() })
        .collect();
    samples
        .map(|x| {
            let mut num = C64::new(0.0, 0.0);
            let mut den = 0.0;
            for j in 0..k {
                let dx = x - nodes[j];
                if dx == 0.0 {
                    return 0.0;
                }
                num += vals[j] * (weights[j] / dx);
                den += weights[j] / dx;
            }
            (g(x) - num / den).norm()
        })
        .fold(0.0, f64::max)
}

/// `2 (1 + sqrt 2)^2 ||D||_F inf_{p in P_{k-1}} ||f' - p||_E` for
/// `k = 0..=m`, with the infimum replaced by the Chebyshev interpolation
/// error (an upper estimate). Interval windows only.
pub fn poly_update_bound(
    window: &SpectralWindow,
    f: &FunctionSpec,
    m: usize,
    norm_d_fro: f64,
) -> Result<BoundReport> {
    if window.kind() != WindowKind::Interval {
        return Err(Error::InvalidArgument(
            "polynomial bound needs an interval window".into(),
        ));
    }
    let g = |x: f64| f.derivative(C64::new(x, 0.0));
    let constant = 2.0 * CROUZEIX_CONSTANT * norm_d_fro;
    let values: Vec<f64> = (0..=m)
        .map(|k| constant * chebyshev_deviation(&g, window.lambda_min(), window.lambda_max(), k))
        .collect();
    Ok(BoundReport {
        rate: mean_rate(
            &values
                .iter()
                .map(|v| v / values[0].max(f64::MIN_POSITIVE))
                .collect::<Vec<_>>(),
        ),
        values,
        constant,
        proxy: true,
    })
}

/// `(1 + sqrt 2)^2 sup_E |f'| ||D||_F`.
pub fn frechet_perturbation_bound(
    window: &SpectralWindow,
    f: &FunctionSpec,
    norm_d_fro: f64,
) -> f64 {
    if norm_d_fro == 0.0 {
        return 0.0;
    }
    CROUZEIX_CONSTANT * window.sup(|z| f.derivative(z).norm()) * norm_d_fro
}

/// Bound for `f(z) = z fhat(z)` with Markov `fhat`: entry `k` is
/// `||z||_E` times the Hermitian Markov bound of `fhat` after `k - 1` steps,
/// available where pole `k` is infinite (infinite otherwise). Requires the
/// `m`-th pole to be infinite.
pub fn markov_modified_bound(
    window: &SpectralWindow,
    plan: &PolePlan,
    fhat: &FunctionSpec,
    m: usize,
    samples: usize,
) -> Result<BoundReport> {
    if m == 0 {
        return Err(Error::InvalidArgument("modified bound needs m >= 1".into()));
    }
    let poles = plan.expand(m)?;
    if !poles[m - 1].is_infinite() {
        return Err(Error::LastPoleNotInfinite);
    }
    let inner = markov_bound_hermitian(window, plan, fhat, m - 1, samples)?;
    let p1 = window.max_modulus();
    let mut values = alloc::vec![f64::INFINITY; m + 1];
    for k in 1..=m {
        if poles[k - 1].is_infinite() {
            values[k] = p1 * inner.values[k - 1];
        }
    }
    Ok(BoundReport {
        values,
        rate: inner.rate,
        constant: p1 * inner.constant,
        proxy: false,
    })
}

/// `(4 ||A + D|| + 2 ||B J|| ||B||) min ||z^{-1/2} - r||`.
pub fn sign_update_bound(
    norm_a_plus_d: f64,
    norm_bj: f64,
    norm_b: f64,
    approximation_error: f64,
) -> f64 {
    (4.0 * norm_a_plus_d + 2.0 * norm_bj * norm_b) * approximation_error
}

/// Sign-update bound for `k = 0..=m`, with the inverse square root
/// approximation error estimated by the Markov estimate on the window of
/// the squared matrices.
pub fn sign_bound_report(
    square_window: &SpectralWindow,
    plan: &PolePlan,
    m: usize,
    norm_a_plus_d: f64,
    norm_bj: f64,
    norm_b: f64,
    samples: usize,
) -> Result<BoundReport> {
    let f = FunctionSpec::inv_sqrt();
    let support = markov_support(&f)?;
    let etas = eta_sequence(plan, square_window, support, m, samples)?;
    let pre = markov_prefactor(square_window, &f, support)?;
    let constant = sign_update_bound(norm_a_plus_d, norm_bj, norm_b, pre);
    Ok(BoundReport {
        values: etas.iter().map(|e| constant * e).collect(),
        rate: mean_rate(&etas),
        constant,
        proxy: false,
    })
}

/// `2^k exp(-k m~ pi^2 / log(16 T(lmax) / T(lmin)))` for `m~` quasi-optimal
/// poles, each repeated `k` times.
pub fn quasi_optimal_eta_estimate(
    window: &SpectralWindow,
    support: (f64, f64),
    per_cycle: usize,
    cycles: usize,
) -> f64 {
    let (alpha, beta) = support;
    let ratio = mobius(alpha, beta, window.lambda_max()) / mobius(alpha, beta, window.lambda_min());
    let k = cycles as f64;
    2f64.powf(k) * (-(k * per_cycle as f64) * PI * PI / (16.0 * ratio).ln()).exp()
}
