//! GLRT detection of a known reference signal in unknown channel and noise.
//!
//! For blocks `Y_l = h_l sᵀ + Z_l` with unknown `h_l` and noise variance the
//! GLRT reduces to the ratio
//!
//! `L_G = Σ_l ‖Y_l s*‖²/‖s‖²  ÷  Σ_l ‖Y_l − ĥ_l sᵀ‖²`,  `ĥ_l = Y_l s*/‖s‖²`,
//!
//! and `(N_s − 1)·L_G` follows `F(2N_R L, 2N_R L(N_s − 1), λ)` with
//! `λ = 2‖s‖² Σ_l ‖h_l‖²/σ²`. All probabilities in this crate are therefore
//! evaluated at `(N_s − 1)·γ` for a threshold `γ` on `L_G`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ncf::{f_quantile_upper, LinkDims};
use crate::waveform::{CMatrix, FrameConfig, ObservationWindow, RsSequence};
use crate::C64;

/// Residual energy below this fraction of the total counts as an exact fit.
pub const DEGENERATE_RATIO: f64 = 1e-20;

/// Statistic and ML estimates for one observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct GlrtResult {
    /// `L_G`; `+∞` when the fit is exact.
    pub statistic: f64,
    /// Per-slot channel estimates `ĥ_l`.
    pub h_hat: Vec<Vec<C64>>,
    /// Noise variance estimate under H0, `‖Y‖²/N`.
    pub sigma0_sq: f64,
    /// Noise variance estimate under H1, residual energy over `N`.
    pub sigma1_sq: f64,
    /// Set when the residual (or the whole window) vanishes, so the ratio has
    /// no finite value.
    pub degenerate: bool,
}

/// Numerator `‖y s*‖²/‖s‖²` and residual `‖y − ĥ s‖²` for one receive row.
#[inline]
fn row_uv(y: &[C64], s: &[C64], s_energy: f64) -> (f64, f64, C64) {
    let mut corr = C64::new(0.0, 0.0);
    for (&a, &b) in y.iter().zip(s) {
        corr += a * b.conj();
    }
    let h = corr / s_energy;
    let mut resid = 0.0;
    for (&a, &b) in y.iter().zip(s) {
        resid += (a - h * b).norm_sqr();
    }
    (corr.norm_sqr() / s_energy, resid, h)
}

fn check_shapes(window: &ObservationWindow, rs: &RsSequence) -> Result<()> {
    if window.n_s() != rs.len() {
        return Err(Error::Shape {
            what: "observation block columns vs RS length",
            expected: rs.len(),
            found: window.n_s(),
        });
    }
    Ok(())
}

/// ML estimates `(ĥ_l, σ̂₀², σ̂₁²)` with `N = N_R N_s L`.
pub fn ml_estimates(
    window: &ObservationWindow,
    rs: &RsSequence,
) -> Result<(Vec<Vec<C64>>, f64, f64)> {
    let r = glrt_statistic(window, rs)?;
    Ok((r.h_hat, r.sigma0_sq, r.sigma1_sq))
}

/// GLRT statistic of an observation window.
pub fn glrt_statistic(window: &ObservationWindow, rs: &RsSequence) -> Result<GlrtResult> {
    check_shapes(window, rs)?;
    let s = rs.samples();
    let es = rs.energy();
    let mut num = 0.0;
    let mut resid = 0.0;
    let mut total = 0.0;
    let mut h_hat = Vec::with_capacity(window.l());
    for y in &window.blocks {
        let mut hl = Vec::with_capacity(y.rows());
        for r in 0..y.rows() {
            let row = y.row(r);
            let (u, v, h) = row_uv(row, s, es);
            num += u;
            resid += v;
            total += row.iter().map(|x| x.norm_sqr()).sum::<f64>();
            hl.push(h);
        }
        h_hat.push(hl);
    }
    let n = (window.n_r() * window.n_s() * window.l()) as f64;
    let (statistic, degenerate) = ratio(num, resid, total);
    Ok(GlrtResult {
        statistic,
        h_hat,
        sigma0_sq: total / n,
        sigma1_sq: resid / n,
        degenerate,
    })
}

#[inline]
fn ratio(num: f64, resid: f64, total: f64) -> (f64, bool) {
    if total == 0.0 {
        (0.0, true)
    } else if resid <= DEGENERATE_RATIO * total {
        (f64::INFINITY, true)
    } else {
        (num / resid, false)
    }
}

/// Threshold on `L_G` together with the false-alarm target it was set for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub gamma: f64,
    pub p_fa_target: f64,
    pub n_slot: usize,
}

impl ThresholdSpec {
    /// Calibrate `γ` so that each of the `n_slot` lag tests has false-alarm
    /// probability `p_fa / n_slot` (union bound over the sweep).
    pub fn calibrate(p_fa: f64, n_slot: usize, dims: &LinkDims) -> Result<Self> {
        Ok(Self {
            gamma: threshold_for_pfa(p_fa, n_slot, dims)?,
            p_fa_target: p_fa,
            n_slot,
        })
    }
}

/// `γ` solving `1 − F_{2N_R L, 2N_R L(N_s−1)}((N_s − 1)γ) = p_fa / n_slot`.
pub fn threshold_for_pfa(p_fa: f64, n_slot: usize, dims: &LinkDims) -> Result<f64> {
    if n_slot == 0 {
        return Err(Error::Domain("n_slot must be positive"));
    }
    let q = p_fa / n_slot as f64;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain("per-test false-alarm probability must lie in (0, 1)"));
    }
    let x = f_quantile_upper(q, &dims.params(0.0)?)?;
    Ok(x / (dims.n_s - 1) as f64)
}

/// Outcome of the test at one candidate lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagDecision {
    pub lag: usize,
    pub statistic: f64,
    /// `statistic > γ`.
    pub detected: bool,
    pub degenerate: bool,
}

/// `L_G` at lag `tau` of a buffered stream (rows = receive antennas), using
/// the blocks starting at `l·N_slot + tau` for `l < l_slots`.
pub fn statistic_at_lag(
    stream: &CMatrix,
    rs: &RsSequence,
    frame: &FrameConfig,
    l_slots: usize,
    tau: usize,
) -> Result<(f64, bool)> {
    let needed = (l_slots - 1) * frame.n_slot + tau + rs.len();
    if stream.cols() < needed {
        return Err(Error::Length {
            needed,
            available: stream.cols(),
        });
    }
    let s = rs.samples();
    let es = rs.energy();
    let (mut num, mut resid, mut total) = (0.0, 0.0, 0.0);
    for l in 0..l_slots {
        let start = l * frame.n_slot + tau;
        for r in 0..stream.rows() {
            let y = &stream.row(r)[start..start + s.len()];
            let (u, v, _) = row_uv(y, s, es);
            num += u;
            resid += v;
            total += y.iter().map(|x| x.norm_sqr()).sum::<f64>();
        }
    }
    Ok(ratio(num, resid, total))
}

/// Run the test at every lag `τ ∈ [0, N_slot)`; entries are ordered by lag.
pub fn detect_sweep(
    stream: &CMatrix,
    rs: &RsSequence,
    gamma: f64,
    frame: &FrameConfig,
    l_slots: usize,
) -> Result<Vec<LagDecision>> {
    if l_slots == 0 {
        return Err(Error::Domain("sweep needs at least one slot"));
    }
    if rs.len() != frame.n_s {
        return Err(Error::Shape {
            what: "RS length vs frame",
            expected: frame.n_s,
            found: rs.len(),
        });
    }
    let needed = frame.samples_needed(l_slots);
    if stream.cols() < needed {
        return Err(Error::Length {
            needed,
            available: stream.cols(),
        });
    }
    (0..frame.n_slot)
        .map(|tau| {
            let (statistic, degenerate) = statistic_at_lag(stream, rs, frame, l_slots, tau)?;
            Ok(LagDecision {
                lag: tau,
                statistic,
                detected: statistic > gamma,
                degenerate,
            })
        })
        .collect()
}

/// Lag with the largest statistic (first one on ties).
pub fn argmax_lag(decisions: &[LagDecision]) -> Option<usize> {
    let mut best: Option<&LagDecision> = None;
    for d in decisions {
        if best.map_or(true, |b| d.statistic > b.statistic) {
            best = Some(d);
        }
    }
    best.map(|d| d.lag)
}
