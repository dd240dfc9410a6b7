//! Noncentral F distribution, miss-detection probability and the
//! fading-aware miss bound.

use alloc::vec::Vec;
use core::cell::Cell;

use crate::array::Beamformer;
use crate::array::UlaConfig;
use crate::channel::{effective_channel, ChannelLaw};
use crate::error::{Error, Result};
use crate::optim::brent_root;
use crate::rng::substream;
use crate::special::{beta_reg_pair, f_cdf_pair, ln_beta};
use crate::math;

/// Default cap on Poisson-mixture terms.
pub const DEFAULT_TERM_CAP: usize = 10_000;
/// Default bound on the neglected Poisson mass.
pub const DEFAULT_SERIES_TOL: f64 = 1e-13;

/// Degrees of freedom and noncentrality of `F(n1, n2, λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcfParams {
    pub n1: f64,
    pub n2: f64,
    pub lambda: f64,
}

impl NcfParams {
    pub fn new(n1: f64, n2: f64, lambda: f64) -> Result<Self> {
        let p = Self { n1, n2, lambda };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.n1 > 0.0 && self.n2 > 0.0 && self.n1.is_finite() && self.n2.is_finite()) {
            return Err(Error::Domain("F degrees of freedom must be positive"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Domain("noncentrality must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// `(CDF, survival)` of the noncentral F law at `x`.
pub fn ncf_cdf_pair(x: f64, p: &NcfParams) -> Result<(f64, f64)> {
    ncf_cdf_pair_with(x, p, DEFAULT_TERM_CAP, DEFAULT_SERIES_TOL)
}

/// [`ncf_cdf_pair`] with an explicit term cap and Poisson-tail tolerance.
///
/// The CDF is the Poisson(λ/2) mixture of `I_y(n1/2 + k, n2/2)` with
/// `y = n1 x / (n1 x + n2)`. Summation starts at the modal index and walks
/// outwards in both directions using the exact recurrence
/// `I_{a+1} = I_a − T_a`, `T_{a+1} = T_a · y (a + b) / (a + 1)`. Weights are
/// carried unnormalized and divided by their sum at the end; the walk stops
/// once a geometric bound on the unvisited Poisson mass falls below `tol`.
pub fn ncf_cdf_pair_with(x: f64, p: &NcfParams, cap: usize, tol: f64) -> Result<(f64, f64)> {
    p.validate()?;
    if x.is_nan() {
        return Err(Error::Domain("F argument is NaN"));
    }
    if x <= 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    if p.lambda == 0.0 {
        return f_cdf_pair(x, p.n1, p.n2);
    }
    let den = p.n1 * x + p.n2;
    let y = p.n1 * x / den;
    let yc = p.n2 / den;
    if y == 0.0 {
        return Ok((0.0, 1.0));
    }
    let b = 0.5 * p.n2;
    let mu = 0.5 * p.lambda;
    let k0 = math::floor(mu) as usize;
    let a0 = 0.5 * p.n1 + k0 as f64;
    let (i0, j0) = beta_reg_pair(a0, b, y, yc)?;
    let ln_t0 = a0 * math::ln(y) + b * math::ln(yc) - math::ln(a0) - ln_beta(a0, b);
    let ln_y = math::ln(y);

    let mut cdf = i0;
    let mut sf = j0;
    let mut total = 1.0;

    // forward walk state
    let (mut af, mut kf, mut i_f, mut j_f, mut ln_tf, mut wf) = (a0, k0, i0, j0, ln_t0, 1.0);
    // backward walk state
    let (mut ab, mut kb, mut i_b, mut j_b, mut ln_tb, mut wb) = (a0, k0, i0, j0, ln_t0, 1.0);

    let mut terms = 1usize;
    loop {
        let rf = mu / (kf as f64 + 1.0);
        let tail_f = wf * rf / (1.0 - rf);
        let tail_b = if kb == 0 {
            0.0
        } else {
            let rb = kb as f64 / mu;
            if rb >= 1.0 {
                f64::INFINITY
            } else {
                wb * rb / (1.0 - rb)
            }
        };
        if tail_f + tail_b <= tol * total {
            break;
        }
        if terms >= cap {
            return Err(Error::Convergence {
                what: "noncentral F series",
                iterations: terms,
                residual: (tail_f + tail_b) / total,
            });
        }
        if tail_f > tol * total * 0.5 {
            let t = math::exp(ln_tf);
            i_f = (i_f - t).max(0.0);
            j_f = (j_f + t).min(1.0);
            ln_tf += ln_y + math::ln((af + b) / (af + 1.0));
            af += 1.0;
            kf += 1;
            wf *= mu / kf as f64;
            cdf += wf * i_f;
            sf += wf * j_f;
            total += wf;
            terms += 1;
        }
        if kb > 0 && tail_b > tol * total * 0.5 {
            ln_tb += math::ln(ab / (ab - 1.0 + b)) - ln_y;
            let t = math::exp(ln_tb);
            i_b = (i_b + t).min(1.0);
            j_b = (j_b - t).max(0.0);
            ab -= 1.0;
            wb *= kb as f64 / mu;
            kb -= 1;
            cdf += wb * i_b;
            sf += wb * j_b;
            total += wb;
            terms += 1;
        }
    }
    Ok(((cdf / total).clamp(0.0, 1.0), (sf / total).clamp(0.0, 1.0)))
}

/// Noncentral F CDF.
pub fn ncf_cdf(x: f64, p: &NcfParams) -> Result<f64> {
    Ok(ncf_cdf_pair(x, p)?.0)
}

/// Noncentral F survival function `1 − CDF`, accurate in the upper tail.
pub fn ncf_sf(x: f64, p: &NcfParams) -> Result<f64> {
    Ok(ncf_cdf_pair(x, p)?.1)
}

fn solve_monotone<F: Fn(f64) -> Result<f64>>(g: F, p: &NcfParams) -> Result<f64> {
    // g is increasing in x with g(0) < 0 and g(inf) > 0
    let mut hi = ((p.n1 + p.lambda) / p.n1).max(1.0);
    let mut it = 0;
    while g(hi)? < 0.0 {
        hi *= 2.0;
        it += 1;
        if it > 2000 || !hi.is_finite() {
            return Err(Error::Bracket {
                what: "F quantile",
                lo: 0.0,
                hi,
            });
        }
    }
    let mut lo = hi * 0.5;
    while lo > 1e-300 && g(lo)? > 0.0 {
        lo *= 0.5;
    }
    if g(lo)? > 0.0 {
        return Ok(lo);
    }
    let err: Cell<Option<Error>> = Cell::new(None);
    let x = brent_root(
        |x| match g(x) {
            Ok(v) => v,
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        },
        lo,
        hi,
        0.0,
        400,
    )?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(x)
}

/// Quantile: the `x` with `CDF(x) = prob`.
pub fn f_quantile(prob: f64, p: &NcfParams) -> Result<f64> {
    p.validate()?;
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::Domain("quantile probability must lie in (0, 1)"));
    }
    if prob > 0.5 {
        return f_quantile_upper(1.0 - prob, p);
    }
    solve_monotone(|x| Ok(ncf_cdf(x, p)? - prob), p)
}

/// Upper-tail quantile: the `x` with `1 − CDF(x) = tail`.
pub fn f_quantile_upper(tail: f64, p: &NcfParams) -> Result<f64> {
    p.validate()?;
    if !(tail > 0.0 && tail < 1.0) {
        return Err(Error::Domain("tail probability must lie in (0, 1)"));
    }
    solve_monotone(|x| Ok(tail - ncf_sf(x, p)?), p)
}

/// Receive antennas, searched slots and RS length of one detection problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkDims {
    pub n_r: usize,
    pub l: usize,
    pub n_s: usize,
}

impl LinkDims {
    pub fn new(n_r: usize, l: usize, n_s: usize) -> Result<Self> {
        if n_r == 0 || l == 0 {
            return Err(Error::Domain("need at least one antenna and one slot"));
        }
        if n_s < 2 {
            return Err(Error::Domain("RS length must be at least 2"));
        }
        Ok(Self { n_r, l, n_s })
    }

    /// Numerator degrees of freedom `2 N_R L`.
    pub fn n1(&self) -> f64 {
        2.0 * (self.n_r * self.l) as f64
    }

    /// Denominator degrees of freedom `2 N_R L (N_s − 1)`.
    pub fn n2(&self) -> f64 {
        2.0 * (self.n_r * self.l * (self.n_s - 1)) as f64
    }

    pub fn params(&self, lambda: f64) -> Result<NcfParams> {
        NcfParams::new(self.n1(), self.n2(), lambda)
    }
}

/// Miss probability `Pr{L_G ≤ γ | H1}` for noncentrality `lambda`.
///
/// `(N_s − 1) L_G` is F-distributed, so this is the F CDF at `(N_s − 1) γ`.
pub fn miss_prob(gamma: f64, dims: &LinkDims, lambda: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain("threshold must be positive"));
    }
    ncf_cdf((dims.n_s - 1) as f64 * gamma, &dims.params(lambda)?)
}

/// Link quantities entering the fading bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingLink {
    pub p_t: f64,
    pub sigma2: f64,
    pub dims: LinkDims,
    pub gamma: f64,
}

/// Logarithmic grid of `n` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (math::ln(lo), math::ln(hi));
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let mut g: Vec<f64> = (0..n)
                .map(|i| math::exp(a + (b - a) * i as f64 / (n - 1) as f64))
                .collect();
            g[0] = lo;
            g[n - 1] = hi;
            g
        }
    }
}

/// Default ξ grid for [`fading_upper_bound`]: 60 log-spaced points on
/// `[1e−5, 1 − 1e−3]`.
pub fn default_xi_grid() -> Vec<f64> {
    log_grid(1e-5, 1.0 - 1e-3, 60)
}

/// Upper bound on the miss probability under fading,
/// `inf_ξ ξ + (1 − ξ) Pr{L_G ≤ γ | λ = L·η(ξ)}` with
/// `η(ξ) = 2 P_T N_s h(ξ) / σ²` and `h(ξ)` the ξ-quantile of the slot-averaged
/// channel energy `(1/L) Σ_l ‖h_l‖²`.
///
/// Returns the bound and the minimizing ξ.
pub fn fading_upper_bound<Q: Fn(f64) -> f64>(
    quantile: Q,
    xi_grid: &[f64],
    link: &FadingLink,
) -> Result<(f64, f64)> {
    if xi_grid.is_empty() {
        return Err(Error::Domain("xi grid must be nonempty"));
    }
    let d = &link.dims;
    let mut best = (f64::INFINITY, f64::NAN);
    for &xi in xi_grid {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::Domain("xi values must lie in (0, 1)"));
        }
        let h = quantile(xi).max(0.0);
        let eta = 2.0 * link.p_t * d.n_s as f64 * h / link.sigma2;
        let term = xi + (1.0 - xi) * miss_prob(link.gamma, d, d.l as f64 * eta)?;
        if term < best.0 {
            best = (term, xi);
        }
    }
    Ok((best.0.min(1.0), best.1))
}

/// Empirical quantiles of the slot-averaged channel energy.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    pub xi: Vec<f64>,
    pub values: Vec<f64>,
    /// True where ξ is below the `1/trials` resolution of the sample.
    pub extrapolated: Vec<bool>,
    pub trials: usize,
}

/// Minimum sample count accepted by [`QuantileTable::from_samples`].
pub const MIN_QUANTILE_TRIALS: usize = 10_000;

impl QuantileTable {
    /// Quantile table from raw samples (order is irrelevant).
    pub fn from_samples(mut samples: Vec<f64>, xi: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < MIN_QUANTILE_TRIALS {
            return Err(Error::Domain("quantile estimation needs at least 1e4 trials"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Domain("non-finite channel energy sample"));
        }
        samples.sort_by(|a, b| a.total_cmp(b));
        let mut values = Vec::with_capacity(xi.len());
        let mut extrapolated = Vec::with_capacity(xi.len());
        for &x in xi {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Domain("xi values must lie in (0, 1)"));
            }
            // lower empirical quantile: the largest sample with empirical CDF <= x
            let k = math::floor(x * n as f64) as usize;
            values.push(samples[k.saturating_sub(1).min(n - 1)]);
            extrapolated.push(x < 1.0 / n as f64);
        }
        // monotone by construction; enforce against unsorted xi input
        Ok(Self {
            xi: xi.to_vec(),
            values,
            extrapolated,
            trials: n,
        })
    }

    /// Quantile at a ξ from the table's grid, by linear interpolation (and
    /// flat extension outside it).
    pub fn value_at(&self, xi: f64) -> f64 {
        let n = self.xi.len();
        if n == 0 {
            return f64::NAN;
        }
        if xi <= self.xi[0] {
            return self.values[0];
        }
        for i in 1..n {
            if xi <= self.xi[i] {
                let t = (xi - self.xi[i - 1]) / (self.xi[i] - self.xi[i - 1]);
                return self.values[i - 1] + t * (self.values[i] - self.values[i - 1]);
            }
        }
        self.values[n - 1]
    }
}

/// Slot-averaged channel energy `(1/L) Σ_l ‖H_l w_l‖²` of trial `trial`,
/// with beams `beams[l % beams.len()]` and randomness from
/// `substream(key, trial)`.
pub fn mean_gain_sample(
    key: u64,
    trial: u64,
    law: &ChannelLaw,
    beams: &[Beamformer],
    rx: &UlaConfig,
    tx: &UlaConfig,
    l_slots: usize,
) -> Result<f64> {
    if beams.is_empty() || l_slots == 0 {
        return Err(Error::Domain("need at least one beam and one slot"));
    }
    let mut rng = substream(key, trial);
    let window = law.sample_window(&mut rng, l_slots);
    let mut acc = 0.0;
    for (l, ch) in window.iter().enumerate() {
        let h = effective_channel(ch, &beams[l % beams.len()], rx, tx)?;
        acc += h.iter().map(|x| x.norm_sqr()).sum::<f64>();
    }
    Ok(acc / l_slots as f64)
}

/// Empirical ξ-quantiles of the slot-averaged channel energy over `trials`
/// independent windows.
#[allow(clippy::too_many_arguments)]
pub fn channel_gain_quantile(
    key: u64,
    law: &ChannelLaw,
    beams: &[Beamformer],
    rx: &UlaConfig,
    tx: &UlaConfig,
    l_slots: usize,
    xi: &[f64],
    trials: usize,
) -> Result<QuantileTable> {
    if trials < MIN_QUANTILE_TRIALS {
        return Err(Error::Domain("quantile estimation needs at least 1e4 trials"));
    }
    let samples = (0..trials as u64)
        .map(|t| mean_gain_sample(key, t, law, beams, rx, tx, l_slots))
        .collect::<Result<Vec<_>>>()?;
    QuantileTable::from_samples(samples, xi)
}
