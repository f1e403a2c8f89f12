use crate::dense::C64;
use crate::error::{Error, Result};

/// Exterior of `[a, b]` onto the exterior of the unit disk:
/// `psi(u) = c + delta (u + 1/u) / 2`, `phi = psi^{-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalMap {
    a: f64,
    b: f64,
    center: f64,
    half_width: f64,
}

impl IntervalMap {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGap { a, b });
        }
        Ok(Self {
            a,
            b,
            center: 0.5 * (a + b),
            half_width: 0.5 * (b - a),
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn psi(&self, u: C64) -> C64 {
        (u + u.inv()) * (0.5 * self.half_width) + self.center
    }

    /// Branch with `|phi| >= 1`.
    pub fn phi(&self, z: C64) -> C64 {
        let t = (z - self.center) / self.half_width;
        larger_root(t, (t * t - 1.0).sqrt())
    }

    /// `phi` on the real axis left of `a`; avoids cancellation for far points.
    pub fn phi_real(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.half_width;
        if t.abs() <= 1.0 {
            return t;
        }
        let r = if t < 0.0 {
            ((t - 1.0) * ((x - self.a) / self.half_width)).sqrt()
        } else {
            ((t + 1.0) * ((x - self.b) / self.half_width)).sqrt()
        };
        if t < 0.0 {
            t - r
        } else {
            t + r
        }
    }
}

impl IntervalMap {
    /// `psi` on the real axis, measured from the nearer endpoint.
    pub fn psi_real(&self, u: f64) -> f64 {
        if u < 0.0 {
            self.a + 0.5 * self.half_width * (u + 1.0) * (u + 1.0) / u
        } else {
            self.b + 0.5 * self.half_width * (u - 1.0) * (u - 1.0) / u
        }
    }
}

fn larger_root(t: C64, s: C64) -> C64 {
    let p = t + s;
    let m = t - s;
    if p.norm() >= m.norm() {
        p
    } else {
        m
    }
}

/// Exterior of the ellipse with real semi-axis `semi_re` and imaginary
/// semi-axis `semi_im` around a real center: `psi(u) = c + rho u + tau / u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseMap {
    center: f64,
    rho: f64,
    tau: f64,
}

impl EllipseMap {
    pub fn new(center: f64, semi_re: f64, semi_im: f64) -> Result<Self> {
        if !(semi_re > 0.0 && semi_im >= 0.0 && semi_re >= semi_im) {
            return Err(Error::InvalidArgument(alloc::format!(
                "ellipse needs semi_re >= semi_im >= 0, semi_re > 0 (got {semi_re}, {semi_im})"
            )));
        }
        Ok(Self {
            center,
            rho: 0.5 * (semi_re + semi_im),
            tau: 0.5 * (semi_re - semi_im),
        })
    }

    pub fn psi(&self, u: C64) -> C64 {
        u * self.rho + u.inv() * self.tau + self.center
    }

    pub fn phi(&self, z: C64) -> C64 {
        // rho u^2 - (z - c) u + tau = 0
        let w = z - self.center;
        let disc = (w * w - 4.0 * self.rho * self.tau).sqrt();
        larger_root(w, disc) / (2.0 * self.rho)
    }
}
