//! Half-wavelength uniform linear arrays, steering vectors and beam gains.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::{math, C64};

/// Tolerance on `‖w‖₂ = 1` accepted by gain evaluations.
pub const NORM_TOL: f64 = 1e-12;

/// A uniform linear array with half-wavelength element spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UlaConfig {
    n_elements: usize,
}

impl UlaConfig {
    pub fn new(n_elements: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::Domain("array needs at least one element"));
        }
        Ok(Self { n_elements })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    /// Element spacing in wavelengths.
    pub fn spacing(&self) -> f64 {
        0.5
    }
}

fn check_angle(angle: f64) -> Result<()> {
    if !(-FRAC_PI_2 - 1e-15..=FRAC_PI_2 + 1e-15).contains(&angle) {
        return Err(Error::Domain("direction outside [-pi/2, pi/2]"));
    }
    Ok(())
}

/// Steering vector `[1, e^{jπ sinθ}, …, e^{jπ(N−1) sinθ}]`.
pub fn steering_vector(array: &UlaConfig, angle: f64) -> Result<Vec<C64>> {
    check_angle(angle)?;
    let mut out = Vec::with_capacity(array.n_elements);
    steering_into(math::sin(angle), array.n_elements, &mut out);
    Ok(out)
}

/// Fill `out` with the steering vector for direction cosine `u = sin(angle)`.
pub fn steering_into(u: f64, n: usize, out: &mut Vec<C64>) {
    out.clear();
    out.extend((0..n).map(|k| phase_term(k, u)));
}

/// e^{jπ k u}, with the phase reduced before evaluating the exponential.
#[inline]
pub(crate) fn phase_term(k: usize, u: f64) -> C64 {
    let mut x = k as f64 * u;
    // reduce to (-1, 1] so that large k does not cost accuracy
    x -= 2.0 * math::round(0.5 * x);
    math::cis(PI * x)
}

/// Array response `v(u)·w = Σ_n w_n e^{jπ n u}`.
#[inline]
pub fn array_factor(w: &[C64], u: f64) -> C64 {
    w.iter()
        .enumerate()
        .fold(C64::new(0.0, 0.0), |acc, (k, &wk)| acc + wk * phase_term(k, u))
}

/// Elements between exact phase evaluations in [`phases_into`].
const RECURRENCE_SPAN: usize = 16;

/// Fill `out` with `e^{jπ k u}` for `k < n` by a rotation recurrence that is
/// re-anchored to the exact phase every [`RECURRENCE_SPAN`] elements, which
/// keeps the error at the level of the direct evaluation at a fraction of the cost.
pub(crate) fn phases_into(u: f64, n: usize, out: &mut Vec<C64>) {
    out.clear();
    let step = math::cis(PI * u);
    let mut z = C64::new(1.0, 0.0);
    for k in 0..n {
        if k % RECURRENCE_SPAN == 0 {
            z = phase_term(k, u);
        }
        out.push(z);
        z *= step;
    }
}

/// Unit-norm transmit weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer(Vec<C64>);

impl Beamformer {
    /// Wrap weights that are already unit-norm within [`NORM_TOL`].
    pub fn new(weights: Vec<C64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("beamformer needs at least one weight"));
        }
        let n2 = norm_sqr(&weights);
        if (math::sqrt(n2) - 1.0).abs() > NORM_TOL {
            return Err(Error::Contract("beamformer weights must have unit norm"));
        }
        Ok(Self(weights))
    }

    /// Scale arbitrary nonzero weights to unit norm.
    pub fn normalized(mut weights: Vec<C64>) -> Result<Self> {
        let n2 = norm_sqr(&weights);
        if weights.is_empty() || !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::Domain("cannot normalize zero or non-finite weights"));
        }
        let s = 1.0 / math::sqrt(n2);
        weights.iter_mut().for_each(|w| *w *= s);
        Ok(Self(weights))
    }

    /// Single active element, `[1, 0, …, 0]`.
    pub fn omni(n_t: usize) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::Domain("beamformer needs at least one weight"));
        }
        let mut w = alloc::vec![C64::new(0.0, 0.0); n_t];
        w[0] = C64::new(1.0, 0.0);
        Ok(Self(w))
    }

    /// Beam matched to `angle`: `v(angle)^† / √N`.
    pub fn matched(array: &UlaConfig, angle: f64) -> Result<Self> {
        let v = steering_vector(array, angle)?;
        let s = 1.0 / math::sqrt(array.n_elements as f64);
        Ok(Self(v.into_iter().map(|x| x.conj() * s).collect()))
    }

    /// Constant-modulus beam from per-element phases.
    pub fn from_phases(phases: &[f64]) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::Domain("beamformer needs at least one weight"));
        }
        let s = 1.0 / math::sqrt(phases.len() as f64);
        Ok(Self(phases.iter().map(|&p| math::cis(p) * s).collect()))
    }

    pub fn weights(&self) -> &[C64] {
        &self.0
    }

    pub fn into_weights(self) -> Vec<C64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest per-element power `max_n |w_n|²`.
    pub fn peak_element_power(&self) -> f64 {
        self.0.iter().map(|w| w.norm_sqr()).fold(0.0, f64::max)
    }

    /// Gain at direction cosine `u`; the caller guarantees `|u| ≤ 1`.
    #[inline]
    pub fn gain_u(&self, u: f64) -> f64 {
        array_factor(&self.0, u).norm_sqr()
    }
}

pub(crate) fn norm_sqr(w: &[C64]) -> f64 {
    w.iter().map(|x| x.norm_sqr()).sum()
}

/// Transmit beamforming gain `|v(φ)·w|²`.
///
/// Returns a contract error if `w` is not unit-norm within [`NORM_TOL`], which
/// can only happen for weights that bypassed the [`Beamformer`] constructors
/// (for example after a power-constraint rescale).
pub fn beam_gain(w: &Beamformer, angle: f64, tx: &UlaConfig) -> Result<f64> {
    check_angle(angle)?;
    if w.len() != tx.n_elements {
        return Err(Error::Shape {
            what: "beamformer length vs transmit array",
            expected: tx.n_elements,
            found: w.len(),
        });
    }
    if (math::sqrt(norm_sqr(&w.0)) - 1.0).abs() > NORM_TOL {
        return Err(Error::Contract("beam gain needs a unit-norm beamformer"));
    }
    Ok(w.gain_u(math::sin(angle)))
}
