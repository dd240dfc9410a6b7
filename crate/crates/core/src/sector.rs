//! Angular sectors and integration in sine space.
//!
//! For a half-wavelength ULA the array response depends on the direction only
//! through u = sin(phi), and the Fourier modes of the array are orthonormal on
//! u in [-1, 1]. All angular widths and averages in this crate are therefore
//! taken in u.

use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::math;

/// Closed interval of directions `[lo, hi]` in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularInterval {
    pub lo: f64,
    pub hi: f64,
}

impl AngularInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::Domain("angular interval needs lo < hi"));
        }
        if lo < -FRAC_PI_2 - 1e-15 || hi > FRAC_PI_2 + 1e-15 {
            return Err(Error::Domain("angular interval must lie in [-pi/2, pi/2]"));
        }
        Ok(Self {
            lo: lo.max(-FRAC_PI_2),
            hi: hi.min(FRAC_PI_2),
        })
    }

    /// Interval given in degrees.
    pub fn from_degrees(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo.to_radians(), hi.to_radians())
    }

    /// The whole visible half-plane.
    pub fn full() -> Self {
        Self {
            lo: -FRAC_PI_2,
            hi: FRAC_PI_2,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Measure of the interval in u = sin(phi).
    pub fn sine_width(&self) -> f64 {
        math::sin(self.hi) - math::sin(self.lo)
    }

    pub fn u_lo(&self) -> f64 {
        math::sin(self.lo)
    }

    pub fn u_hi(&self) -> f64 {
        math::sin(self.hi)
    }

    pub fn contains(&self, phi: f64) -> bool {
        phi >= self.lo && phi <= self.hi
    }

    /// `n` directions evenly spaced in angle, endpoints included.
    pub fn angle_grid(&self, n: usize) -> alloc::vec::Vec<f64> {
        linspace(self.lo, self.hi, n)
    }

    /// Directions on a grid with the given angular step, endpoints included.
    pub fn angle_grid_step(&self, step: f64) -> alloc::vec::Vec<f64> {
        let n = (math::floor(self.width() / step + 1e-9) as usize).max(1) + 1;
        let mut g = linspace(self.lo, self.lo + step * (n - 1) as f64, n);
        if let Some(last) = g.last_mut() {
            if *last > self.hi {
                *last = self.hi;
            }
        }
        if g.last().map_or(true, |&x| self.hi - x > 1e-12) {
            g.push(self.hi);
        }
        g
    }

    /// Integral of `f(phi)` over the interval with respect to u = sin(phi),
    /// by composite Gauss-Legendre quadrature on `panels` equal u-panels.
    pub fn integrate_u<F: FnMut(f64) -> f64>(&self, f: F, panels: usize) -> f64 {
        integrate_u_range(self.u_lo(), self.u_hi(), f, panels)
    }

    /// Mean of `f` over the interval in sine-space measure.
    pub fn mean_u<F: FnMut(f64) -> f64>(&self, f: F, panels: usize) -> f64 {
        self.integrate_u(f, panels) / self.sine_width()
    }
}

/// Integral over u in `[u_lo, u_hi]` of `f(asin u)`.
pub fn integrate_u_range<F: FnMut(f64) -> f64>(
    u_lo: f64,
    u_hi: f64,
    mut f: F,
    panels: usize,
) -> f64 {
    // 5-point Gauss-Legendre nodes and weights on [-1, 1]
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let panels = panels.max(1);
    let h = (u_hi - u_lo) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let c = u_lo + (p as f64 + 0.5) * h;
        for k in 0..5 {
            let u = (c + 0.5 * h * X[k]).clamp(-1.0, 1.0);
            acc += W[k] * f(math::asin(u));
        }
    }
    0.5 * h * acc
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> alloc::vec::Vec<f64> {
    match n {
        0 => alloc::vec::Vec::new(),
        1 => alloc::vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
