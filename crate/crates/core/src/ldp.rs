//! Large-deviations analysis of the miss probability.
//!
//! Per slot, the GLRT numerator and residual energies (scaled by `2/σ²`) are
//! a noncentral `χ²_{2N_R}(η)` and a central `χ²_{2N_R(N_s−1)}`; their
//! joint log-moment generating function is
//!
//! `Λ(t1, t2) = η t1/(1 − 2t1) − N_R ln(1 − 2t1) − N_R(N_s − 1) ln(1 − 2t2)`.
//!
//! A miss is the event that the slot averages `(u, v)` satisfy `u ≤ γ v`, and
//! its probability decays like `e^{−L I*}` where `I*` is the infimum of the
//! Legendre transform of `Λ` over that set.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::optim::golden_section_min;

/// Rate function value and the optimizer that attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFunctionEval {
    /// `I*(η, γ)`; zero when `valid` is false.
    pub value: f64,
    pub x_star: f64,
    pub v_star: f64,
    pub t1_star: f64,
    pub t2_star: f64,
    /// `γ < (2N_R + η) / (2N_R(N_s − 1))`, i.e. the mean statistic exceeds
    /// the threshold and misses are rare events.
    pub valid: bool,
}

impl RateFunctionEval {
    fn invalid() -> Self {
        Self {
            value: 0.0,
            x_star: f64::NAN,
            v_star: f64::NAN,
            t1_star: f64::NAN,
            t2_star: f64::NAN,
            valid: false,
        }
    }
}

fn check_inputs(eta: f64, gamma: f64, n_r: usize, n_s: usize) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Domain("eta must be finite and nonnegative"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain("gamma must be positive"));
    }
    if n_r == 0 || n_s < 2 {
        return Err(Error::Domain("need n_r >= 1 and n_s >= 2"));
    }
    Ok(())
}

/// `γ` at and above which the rate function vanishes.
pub fn validity_threshold(eta: f64, n_r: usize, n_s: usize) -> f64 {
    let nr = n_r as f64;
    (2.0 * nr + eta) / (2.0 * nr * (n_s - 1) as f64)
}

/// Closed-form rate function `I*(η, γ)`.
///
/// `x*` is the positive root of `(γ+1)/(ηγ)·(x² − N_R²) − x − N_R − 2N_R(N_s−1)`
/// and `v* = (x*² − N_R²)/(ηγ)` is the minimizing residual energy.
pub fn rate_function(eta: f64, gamma: f64, n_r: usize, n_s: usize) -> Result<RateFunctionEval> {
    check_inputs(eta, gamma, n_r, n_s)?;
    if eta == 0.0 || gamma >= validity_threshold(eta, n_r, n_s) {
        return Ok(RateFunctionEval::invalid());
    }
    let nr = n_r as f64;
    let m = nr * (n_s - 1) as f64;
    let a = (gamma + 1.0) / (eta * gamma);
    let c = a * nr * nr + nr + 2.0 * m;
    let disc = 1.0 + 4.0 * a * c;
    // root of a x^2 - x - c = 0 written to avoid cancellation
    let x = 2.0 * c / (math::sqrt(disc) - 1.0).max(f64::MIN_POSITIVE);
    let x = if x.is_finite() { x } else { (1.0 + math::sqrt(disc)) / (2.0 * a) };
    if !(x > nr) {
        return Err(Error::Convergence {
            what: "rate function root below N_R",
            iterations: 0,
            residual: x - nr,
        });
    }
    let v = (x - nr) * (x + nr) / (eta * gamma);
    let d = nr + x;
    let gv = gamma * v;
    let value = 0.5 * eta * (1.0 - gv / d) + m * math::ln(2.0 * m / v) - nr * math::ln(gv / d);
    Ok(RateFunctionEval {
        value: value.max(0.0),
        x_star: x,
        v_star: v,
        t1_star: 0.5 - d / (2.0 * gv),
        t2_star: 0.5 - m / v,
        valid: true,
    })
}

/// Joint log-MGF `Λ(t1, t2)` of the per-slot numerator and residual
/// energies; `+∞` outside `t1, t2 < ½`.
pub fn log_mgf(t1: f64, t2: f64, eta: f64, n_r: usize, n_s: usize) -> f64 {
    if !(t1 < 0.5 && t2 < 0.5) {
        return f64::INFINITY;
    }
    let nr = n_r as f64;
    let m = nr * (n_s - 1) as f64;
    eta * t1 / (1.0 - 2.0 * t1) - nr * math::ln_1p(-2.0 * t1) - m * math::ln_1p(-2.0 * t2)
}

/// `t1 u + t2 v − Λ(t1, t2)`, the objective whose supremum over `t` is the
/// pointwise rate `I_L(u, v)`.
pub fn dual_objective(t1: f64, t2: f64, u: f64, v: f64, eta: f64, n_r: usize, n_s: usize) -> f64 {
    t1 * u + t2 * v - log_mgf(t1, t2, eta, n_r, n_s)
}

/// Stationarity residual `(γ+1)/2 − d/(2v) − N_R(N_s−1)/v` of the minimizing
/// `v`, with `d = N_R + x`.
pub fn kkt_residual(eval: &RateFunctionEval, gamma: f64, n_r: usize, n_s: usize) -> f64 {
    let nr = n_r as f64;
    let d = nr + eval.x_star;
    0.5 * (gamma + 1.0) - d / (2.0 * eval.v_star) - nr * (n_s - 1) as f64 / eval.v_star
}

/// `sup_{t<½} f(t)` for a concave `f`, searched over `y = ln(1 − 2t)`.
fn sup_half_line<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    let g = |y: f64| -f(0.5 * (1.0 - math::exp(y)));
    let r = golden_section_min(g, -40.0, 40.0, 1e-13, 500)?;
    Ok(-r.value)
}

/// Pointwise rate `I_L(u, v) = sup_{t1,t2<½} t1 u + t2 v − Λ(t1, t2)`,
/// computed numerically (the supremum separates in `t1` and `t2`).
pub fn pointwise_rate(u: f64, v: f64, eta: f64, n_r: usize, n_s: usize) -> Result<f64> {
    let nr = n_r as f64;
    let m = nr * (n_s - 1) as f64;
    let s1 = sup_half_line(|t| t * u - eta * t / (1.0 - 2.0 * t) + nr * math::ln_1p(-2.0 * t))?;
    let s2 = sup_half_line(|t| t * v + m * math::ln_1p(-2.0 * t))?;
    Ok(s1 + s2)
}

/// Numerical rate function: minimizes the pointwise rate along the boundary
/// `u = γ v` of the miss region by golden section over
/// `v ∈ [1e−6, 10·2N_R(N_s−1)(1+η)]`.
pub fn rate_function_oracle(eta: f64, gamma: f64, n_r: usize, n_s: usize) -> Result<f64> {
    check_inputs(eta, gamma, n_r, n_s)?;
    if eta == 0.0 || gamma >= validity_threshold(eta, n_r, n_s) {
        return Ok(0.0);
    }
    let m = (n_r * (n_s - 1)) as f64;
    let hi = 10.0 * 2.0 * m * (1.0 + eta);
    let err = core::cell::Cell::new(None);
    let r = golden_section_min(
        |v| match pointwise_rate(gamma * v, v, eta, n_r, n_s) {
            Ok(x) => x,
            Err(e) => {
                err.set(Some(e));
                f64::INFINITY
            }
        },
        1e-6,
        hi,
        1e-10,
        1000,
    )?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(r.value.max(0.0))
}

/// Exponential miss approximation `e^{−L I*}` (1 when the rate is invalid).
pub fn miss_approx(l_slots: usize, eval: &RateFunctionEval) -> f64 {
    if eval.valid {
        math::exp(-(l_slots as f64) * eval.value)
    } else {
        1.0
    }
}

/// Transmit power, receive antennas, RS length and noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub p_t: f64,
    pub n_r: usize,
    pub n_s: usize,
    pub sigma2: f64,
}

impl LinkBudget {
    /// `η = 2 P_T N_R N_s G / (α σ²)`.
    pub fn eta(&self, gain: f64, alpha: f64) -> f64 {
        2.0 * self.p_t * (self.n_r * self.n_s) as f64 * gain / (alpha * self.sigma2)
    }
}

/// Per-direction link quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionLink {
    pub angle: f64,
    pub pathloss: f64,
    pub avg_gain: f64,
    pub eta: f64,
    /// The average gain vanishes here, so the miss probability does not decay.
    pub null_gain: bool,
}

/// Normalized noncentrality toward `angle` for a codebook whose average gain
/// is `gain` and a pathloss map `alpha`.
pub fn eta_for_direction<G, A>(angle: f64, gain: G, alpha: A, link: &LinkBudget) -> Result<DirectionLink>
where
    G: Fn(f64) -> f64,
    A: Fn(f64) -> f64,
{
    let a = alpha(angle);
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain("pathloss must be positive"));
    }
    let g = gain(angle).max(0.0);
    Ok(DirectionLink {
        angle,
        pathloss: a,
        avg_gain: g,
        eta: link.eta(g, a),
        null_gain: g == 0.0,
    })
}

/// Worst direction on a grid and its rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstDirection {
    pub link: DirectionLink,
    pub rate: RateFunctionEval,
}

/// Smallest `η` over `grid` and `I*(η_min, γ)`, which caps the decay rate of
/// the direction-averaged miss probability.
pub fn worst_direction_exponent<G, A>(
    gain: G,
    alpha: A,
    grid: &[f64],
    gamma: f64,
    link: &LinkBudget,
) -> Result<WorstDirection>
where
    G: Fn(f64) -> f64,
    A: Fn(f64) -> f64,
{
    let mut worst: Option<DirectionLink> = None;
    for &phi in grid {
        let d = eta_for_direction(phi, &gain, &alpha, link)?;
        if worst.map_or(true, |w| d.eta < w.eta) {
            worst = Some(d);
        }
    }
    let link_min = worst.ok_or(Error::Domain("direction grid must be nonempty"))?;
    let rate = rate_function(link_min.eta, gamma, link.n_r, link.n_s)?;
    Ok(WorstDirection {
        link: link_min,
        rate,
    })
}

/// Direction-wise rates on a grid (for plotting or regression checks).
pub fn rates_on_grid<G, A>(
    gain: G,
    alpha: A,
    grid: &[f64],
    gamma: f64,
    link: &LinkBudget,
) -> Result<Vec<(DirectionLink, RateFunctionEval)>>
where
    G: Fn(f64) -> f64,
    A: Fn(f64) -> f64,
{
    grid.iter()
        .map(|&phi| {
            let d = eta_for_direction(phi, &gain, &alpha, link)?;
            Ok((d, rate_function(d.eta, gamma, link.n_r, link.n_s)?))
        })
        .collect()
}
