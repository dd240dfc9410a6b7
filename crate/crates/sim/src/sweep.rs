//! Seeded parallel sweeps over the searched slot counts.
//!
//! Trials are grouped in fixed chunks whose partial sums are combined in
//! chunk order, so the floating-point result is the same for any number of
//! workers.

use mmwave_discovery::glrt::{detect_sweep, threshold_for_pfa};
use mmwave_discovery::ldp::{eta_for_direction, miss_approx, rate_function, worst_direction_exponent, LinkBudget};
use mmwave_discovery::ncf::{default_xi_grid, fading_upper_bound, FadingLink, QuantileTable};
use mmwave_discovery::rng::{derive_key, substream};
use mmwave_discovery::waveform::synthesize_stream;
use rayon::prelude::*;

use crate::engine::{Point, Setup};
use crate::error::{Result, SimError};
use crate::output::ResultRow;
use crate::scenario::EngineKind;

/// Trials per work unit.
pub const CHUNK: u64 = 256;

const QUANTILE_LABEL: u64 = 0x51_5541_4e54;
const FA_LABEL: u64 = 0x4641;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses one per core.
    pub workers: Option<usize>,
}

fn pool(opts: &RunOptions) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.workers {
        if n == 0 {
            return Err(SimError::config("--workers must be positive"));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| SimError::config(format!("thread pool: {e}")))
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: f64, n: f64) -> (f64, f64) {
    let p = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// Normal interval for the mean of values in [0, 1].
fn mean_interval(sum: f64, sum_sq: f64, n: f64) -> (f64, f64) {
    let m = sum / n;
    let var = if n > 1.0 {
        ((sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let half = Z95 * (var / n).sqrt();
    ((m - half).max(0.0), (m + half).min(1.0))
}

/// Sum and sum of squares of `f(t)` over trials `0..n`, in chunk order.
fn chunked_sums<F>(n: u64, f: F) -> Result<(f64, f64)>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = (0.0, 0.0);
            for t in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let x = f(t)?;
                acc.0 += x;
                acc.1 += x * x;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1)))
}

fn threshold(setup: &Setup, l: usize) -> Result<f64> {
    match setup.scenario.detector.gamma {
        Some(g) => Ok(g),
        None => Ok(threshold_for_pfa(
            setup.scenario.detector.p_fa,
            setup.frame.n_slot,
            &setup.dims(l)?,
        )?),
    }
}

fn point_key(seed: u64, l: usize, cond: usize) -> u64 {
    derive_key(derive_key(seed, l as u64), cond as u64)
}

/// Searched slot counts in increasing order, without repeats.
fn sorted_l(setup: &Setup) -> Vec<usize> {
    let mut l = setup.scenario.detector.l.clone();
    l.sort_unstable();
    l.dedup();
    l
}

/// Empirical quantiles of the slot-averaged effective channel energy.
fn gain_quantiles(setup: &Setup, l: usize, grid: &[f64]) -> Result<QuantileTable> {
    let key = derive_key(derive_key(setup.scenario.seed, l as u64), QUANTILE_LABEL);
    let samples: Vec<f64> = (0..setup.scenario.quantile_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(key, t);
            let h = setup.slot_channels(&mut rng, l)?;
            Ok(h.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>() / l as f64)
        })
        .collect::<Result<_>>()?;
    Ok(QuantileTable::from_samples(samples, grid)?)
}

/// Large-deviations estimate `exp(−L·I*(η, γ))` at the worst direction of
/// the sector (or at the fixed dominant direction).
fn ldp_estimate(setup: &Setup, l: usize, gamma: f64, sigma2: f64) -> Result<f64> {
    let sc = &setup.scenario;
    let link = LinkBudget {
        p_t: sc.link.p_t,
        n_r: setup.rx.n_elements(),
        n_s: setup.frame.n_s,
        sigma2,
    };
    let gain = |phi: f64| setup.beams.avg_gain(phi);
    let alpha = |phi: f64| setup.profile.alpha_at(phi).unwrap_or(f64::NAN);
    let rate = if sc.channel.random_direction {
        let grid = setup.sector.angle_grid_step(0.1f64.to_radians());
        worst_direction_exponent(gain, alpha, &grid, gamma, &link)?.rate
    } else {
        let d = eta_for_direction(sc.channel.dominant_aod_deg.to_radians(), gain, alpha, &link)?;
        rate_function(d.eta, gamma, link.n_r, link.n_s)?
    };
    Ok(miss_approx(l, &rate))
}

/// Miss probability against searched slots for every condition.
///
/// Rows are ordered by L, then by the scenario's condition order.
pub fn run_miss_sweep(setup: &Setup, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let pool = pool(opts)?;
    pool.install(|| miss_rows(setup))
}

fn miss_rows(setup: &Setup) -> Result<Vec<ResultRow>> {
    let sc = &setup.scenario;
    let grid = default_xi_grid();
    let n = sc.trials;
    let mut rows = Vec::new();
    for l in sorted_l(setup) {
        let gamma = threshold(setup, l)?;
        let table = if sc.quantile_trials > 0 {
            Some(gain_quantiles(setup, l, &grid)?)
        } else {
            None
        };
        for (ci, cond) in setup.conditions.iter().enumerate() {
            let point = Point::new(setup, l, gamma, cond.sigma2)?;
            let key = point_key(sc.seed, l, ci);
            let (sum, sum_sq) = chunked_sums(n, |t| point.trial(&mut substream(key, t)))?;
            let p = sum / n as f64;
            let (ci_lo, ci_hi) = match sc.engine {
                EngineKind::Conditional => mean_interval(sum, sum_sq, n as f64),
                _ => wilson_interval(sum, n as f64),
            };
            let lemma1_bound = match &table {
                Some(t) => {
                    let fl = FadingLink {
                        p_t: sc.link.p_t,
                        sigma2: cond.sigma2,
                        dims: point.dims,
                        gamma,
                    };
                    Some(fading_upper_bound(|x| t.value_at(x), &grid, &fl)?.0)
                }
                None => None,
            };
            rows.push(ResultRow {
                scenario_id: sc.id.clone(),
                l,
                condition: cond.label.clone(),
                p_miss: p,
                ci_lo,
                ci_hi,
                lemma1_bound,
                ldp_approx: Some(ldp_estimate(setup, l, gamma, cond.sigma2)?),
                trials: n,
                seed: sc.seed,
            });
        }
    }
    Ok(rows)
}

/// Empirical false-alarm rate of full lag sweeps over noise alone.
///
/// Each trial buffers `(L + 1)·N_slot` noise samples and tests every lag in
/// `[0, N_slot)`; a trial counts as a false alarm when any lag crosses the
/// threshold. The rate is reported in the `p_miss` column with condition
/// `fa`.
pub fn run_fa_calibration(setup: &Setup, l: usize, opts: &RunOptions) -> Result<ResultRow> {
    let sc = &setup.scenario;
    let gamma = threshold(setup, l)?;
    let sigma2 = setup.conditions[0].sigma2;
    let key = derive_key(derive_key(sc.seed, l as u64), FA_LABEL);
    let n = sc.trials;
    let pool = pool(opts)?;
    let (alarms, _) = pool.install(|| {
        chunked_sums(n, |t| {
            let mut rng = substream(key, t);
            let y = synthesize_stream(&mut rng, &[], setup.rx.n_elements(), &setup.rs, &setup.frame, 0, l, sigma2)?;
            let hit = detect_sweep(&y, &setup.rs, gamma, &setup.frame, l)?.iter().any(|d| d.detected);
            Ok(if hit { 1.0 } else { 0.0 })
        })
    })?;
    let (ci_lo, ci_hi) = wilson_interval(alarms, n as f64);
    Ok(ResultRow {
        scenario_id: sc.id.clone(),
        l,
        condition: "fa".into(),
        p_miss: alarms / n as f64,
        ci_lo,
        ci_hi,
        lemma1_bound: None,
        ldp_approx: None,
        trials: n,
        seed: sc.seed,
    })
}

/// False-alarm rows for every searched slot count.
pub fn run_fa_sweep(setup: &Setup, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    sorted_l(setup).into_iter().map(|l| run_fa_calibration(setup, l, opts)).collect()
}
