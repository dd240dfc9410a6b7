//! Constant-modulus (CM) and variable-modulus (VM) beam synthesis.
//!
//! Both methods minimize the weighted squared mismatch between the array
//! amplitude `|v(φ)·w|` and the target amplitude `√G(φ)` on an angle grid:
//! in-band points get one weight, out-of-band points another, and a guard
//! strip just outside the band (where no beam can follow a step) gets none.
//! The fitted band extends a little past each edge with the edge value of the
//! target, so that the roll-off of the main lobe falls outside the sector.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::array::{phase_term, Beamformer};
use crate::error::{Error, Result};
use crate::optim::{lbfgs, LbfgsConfig};
use crate::rng::substream;
use crate::sector::AngularInterval;
use crate::{math, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamKind {
    Cm,
    Vm,
}

/// Synthesis settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Angle grid spacing over [−90°, 90°], in degrees (at most 0.5).
    pub grid_step_deg: f64,
    pub in_band_weight: f64,
    pub out_band_weight: f64,
    /// Extension in u of the fitted band past each edge; `None` uses
    /// `1.5/N_T`.
    pub edge_margin_u: Option<f64>,
    /// Width in `u = sin φ` of the unweighted strip on each side of the
    /// band; `None` uses `2/N_T`, about one main-lobe width.
    pub guard_u: Option<f64>,
    /// Random restarts for CM synthesis.
    pub cm_starts: usize,
    pub lbfgs_max_iter: usize,
    pub ga_population: usize,
    pub ga_generations: usize,
    /// Generations without improvement before the population is re-seeded
    /// around the incumbent.
    pub ga_stagnation: usize,
    /// Finish VM synthesis with a gradient polish of the best genome.
    pub vm_polish: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            grid_step_deg: 0.25,
            in_band_weight: 1.0,
            out_band_weight: 2.0,
            edge_margin_u: None,
            guard_u: None,
            cm_starts: 8,
            lbfgs_max_iter: 3000,
            ga_population: 64,
            ga_generations: 500,
            ga_stagnation: 60,
            vm_polish: true,
        }
    }
}

/// Fit diagnostics of a synthesized beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisReport {
    /// Achieved objective (normalized weighted squared amplitude error).
    pub mismatch: f64,
    /// Smallest gain on in-band grid points.
    pub min_in_band_gain: f64,
    /// Largest gain on out-of-band grid points beyond the guard strip.
    pub max_leakage: f64,
    pub kind: BeamKind,
    /// The optimizer stopped without meeting its convergence test; the beam
    /// is the best one found.
    pub warning: bool,
}

struct Problem {
    n_t: usize,
    k: usize,
    /// `k × n_t` steering rows `e^{jπ n u_k}`.
    steer: Vec<C64>,
    target: Vec<f64>,
    weight: Vec<f64>,
    in_band: Vec<bool>,
    out_band: Vec<bool>,
    wsum: f64,
    /// Fitted band in u, clipped to [−1, 1].
    fit_u: (f64, f64),
}

impl Problem {
    fn new<F: Fn(f64) -> f64>(
        target: &F,
        band: &AngularInterval,
        n_t: usize,
        cfg: &SynthConfig,
    ) -> Result<Self> {
        if n_t < 2 {
            return Err(Error::Domain("synthesis needs at least two elements"));
        }
        if !(cfg.grid_step_deg > 0.0 && cfg.grid_step_deg <= 0.5) {
            return Err(Error::Domain("synthesis grid step must lie in (0, 0.5] degrees"));
        }
        if !(cfg.in_band_weight >= 0.0 && cfg.out_band_weight >= 0.0)
            || cfg.in_band_weight + cfg.out_band_weight == 0.0
        {
            return Err(Error::Domain("synthesis weights must be nonnegative, not both zero"));
        }
        let guard = cfg.guard_u.unwrap_or(2.0 / n_t as f64);
        let margin = cfg.edge_margin_u.unwrap_or(1.5 / n_t as f64);
        if !(guard >= 0.0 && margin >= 0.0) {
            return Err(Error::Domain("guard and edge margin must be nonnegative"));
        }
        let n_grid = math::round(180.0 / cfg.grid_step_deg) as usize + 1;
        let (flo, fhi) = (band.u_lo() - margin, band.u_hi() + margin);
        let mut steer = Vec::with_capacity(n_grid * n_t);
        let mut tgt = Vec::with_capacity(n_grid);
        let mut weight = Vec::with_capacity(n_grid);
        let mut in_band = Vec::with_capacity(n_grid);
        let mut out_band = Vec::with_capacity(n_grid);
        for i in 0..n_grid {
            let phi = (-90.0 + 180.0 * i as f64 / (n_grid - 1) as f64).to_radians();
            let u = math::sin(phi);
            steer.extend((0..n_t).map(|n| phase_term(n, u)));
            let inside = band.contains(phi);
            let fitted = inside || (u >= flo && u <= fhi);
            let g = if fitted {
                target(phi.clamp(band.lo, band.hi)).max(0.0)
            } else {
                0.0
            };
            tgt.push(math::sqrt(g));
            in_band.push(inside);
            let outside = !fitted && (u <= flo - guard || u >= fhi + guard);
            out_band.push(outside);
            weight.push(if fitted {
                cfg.in_band_weight
            } else if outside {
                cfg.out_band_weight
            } else {
                0.0
            });
        }
        let wsum = weight.iter().sum();
        Ok(Self {
            n_t,
            k: n_grid,
            steer,
            target: tgt,
            weight,
            in_band,
            out_band,
            wsum,
            fit_u: (flo.max(-1.0), fhi.min(1.0)),
        })
    }

    #[inline]
    fn response(&self, k: usize, w: &[C64]) -> C64 {
        let row = &self.steer[k * self.n_t..(k + 1) * self.n_t];
        let mut a = C64::new(0.0, 0.0);
        for (v, x) in row.iter().zip(w) {
            a += v * x;
        }
        a
    }

    /// Objective; when `g` is given it receives `∂f/∂w_n` in the form
    /// `g_n` with `δf = Σ_n Re(g_n δw_n)`.
    fn eval(&self, w: &[C64], mut g: Option<&mut [C64]>) -> f64 {
        if let Some(g) = g.as_deref_mut() {
            g.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        }
        let scale = 1.0 / self.wsum;
        let mut f = 0.0;
        for k in 0..self.k {
            let c = self.weight[k];
            if c == 0.0 {
                continue;
            }
            let a = self.response(k, w);
            let m = a.norm() + 1e-15;
            let r = m - self.target[k];
            f += c * r * r;
            if let Some(g) = g.as_deref_mut() {
                let coef = a.conj() * (2.0 * c * r / m * scale);
                let row = &self.steer[k * self.n_t..(k + 1) * self.n_t];
                for (gn, v) in g.iter_mut().zip(row) {
                    *gn += coef * v;
                }
            }
        }
        f * scale
    }

    fn report(&self, w: &[C64], kind: BeamKind, warning: bool) -> SynthesisReport {
        let mut min_in = f64::INFINITY;
        let mut leak: f64 = 0.0;
        for k in 0..self.k {
            let g = self.response(k, w).norm_sqr();
            if self.in_band[k] {
                min_in = min_in.min(g);
            } else if self.out_band[k] {
                leak = leak.max(g);
            }
        }
        SynthesisReport {
            mismatch: self.eval(w, None),
            min_in_band_gain: min_in,
            max_leakage: leak,
            kind,
            warning,
        }
    }
}

fn cm_weights(theta: &[f64], out: &mut [C64]) {
    let s = 1.0 / math::sqrt(theta.len() as f64);
    for (o, &t) in out.iter_mut().zip(theta) {
        *o = math::cis(t) * s;
    }
}

fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn cm_search(p: &Problem, cfg: &SynthConfig, seed: u64) -> (Vec<f64>, f64, bool) {
    let n = p.n_t;
    let uc = 0.5 * (p.fit_u.0 + p.fit_u.1);
    let bw = p.fit_u.1 - p.fit_u.0;
    let lcfg = LbfgsConfig {
        max_iter: cfg.lbfgs_max_iter,
        ftol: 1e-13,
        gtol: 1e-10,
        ..LbfgsConfig::default()
    };
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for s in 0..cfg.cm_starts.max(1) {
        let mut rng = substream(seed, s as u64);
        // a quadratic-phase (chirp) start spreads a steered beam over the band
        let curv = bw * PI / (2.0 * (n - 1) as f64) * (1.0 + 0.3 * gauss(&mut rng));
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        let mid = 0.5 * (n - 1) as f64;
        let x0: Vec<f64> = (0..n)
            .map(|i| {
                let d = i as f64 - mid;
                -PI * uc * i as f64 + sign * curv * d * d + 0.1 * gauss(&mut rng)
            })
            .collect();
        let mut w = alloc::vec![C64::new(0.0, 0.0); n];
        let mut g = alloc::vec![C64::new(0.0, 0.0); n];
        let r = lbfgs(
            |x, grad| {
                cm_weights(x, &mut w);
                let f = p.eval(&w, Some(&mut g));
                for i in 0..n {
                    grad[i] = -(g[i] * w[i]).im;
                }
                f
            },
            &x0,
            &lcfg,
        );
        if best.as_ref().map_or(true, |b| r.value < b.1) {
            best = Some((r.x, r.value, !r.converged));
        }
    }
    best.expect("at least one start")
}

/// Constant-modulus beam `w_n = e^{jθ_n}/√N_T` fitted to `target` (a gain
/// function of direction) on `band`.
pub fn synthesize_cm<F: Fn(f64) -> f64>(
    target: F,
    band: &AngularInterval,
    n_t: usize,
    cfg: &SynthConfig,
    seed: u64,
) -> Result<(Beamformer, SynthesisReport)> {
    let p = Problem::new(&target, band, n_t, cfg)?;
    let (theta, _, warn) = cm_search(&p, cfg, seed);
    let w = Beamformer::from_phases(&theta)?;
    let rep = p.report(w.weights(), BeamKind::Cm, warn);
    Ok((w, rep))
}

/// Symmetric-magnitude parametrization: `h = ⌈N/2⌉` magnitudes then `N`
/// phases.
struct VmLayout {
    n: usize,
    h: usize,
}

impl VmLayout {
    fn new(n: usize) -> Self {
        Self { n, h: n.div_ceil(2) }
    }

    fn dim(&self) -> usize {
        self.h + self.n
    }

    fn mirror(&self, i: usize) -> usize {
        i.min(self.n - 1 - i)
    }

    /// Weights and the norm `R` before normalization.
    fn weights(&self, x: &[f64], out: &mut [C64]) -> f64 {
        let mut r2 = 0.0;
        for i in 0..self.n {
            let m = x[self.mirror(i)];
            r2 += m * m;
        }
        let r = math::sqrt(r2);
        let s = if r > 0.0 { 1.0 / r } else { 0.0 };
        for i in 0..self.n {
            out[i] = math::cis(x[self.h + i]) * (x[self.mirror(i)] * s);
        }
        r
    }

    fn multiplicity(&self, j: usize) -> f64 {
        if self.n % 2 == 1 && j == self.h - 1 {
            1.0
        } else {
            2.0
        }
    }
}

fn vm_objective(p: &Problem, lay: &VmLayout, x: &[f64], w: &mut [C64]) -> f64 {
    let r = lay.weights(x, w);
    if !(r > 0.0) {
        return f64::INFINITY;
    }
    p.eval(w, None)
}

fn ga_search(
    p: &Problem,
    lay: &VmLayout,
    start: &[f64],
    cfg: &SynthConfig,
    seed: u64,
) -> (Vec<f64>, f64) {
    let d = lay.dim();
    let pop_n = cfg.ga_population.max(4);
    let mut rng = substream(seed, 0x5641_4741);
    let mut w = alloc::vec![C64::new(0.0, 0.0); lay.n];
    let perturb = |rng: &mut crate::rng::SimRng, base: &[f64], mag_sd: f64, ph_sd: f64| -> Vec<f64> {
        (0..d)
            .map(|j| {
                if j < lay.h {
                    (base[j] * (1.0 + mag_sd * gauss(rng))).abs()
                } else {
                    base[j] + ph_sd * gauss(rng)
                }
            })
            .collect()
    };
    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(pop_n);
    pop.push(start.to_vec());
    while pop.len() < pop_n {
        let g = if pop.len() < pop_n / 2 {
            perturb(&mut rng, start, 0.3, 0.5)
        } else {
            (0..d)
                .map(|j| {
                    if j < lay.h {
                        2.0 * rng.random::<f64>()
                    } else {
                        PI * (2.0 * rng.random::<f64>() - 1.0)
                    }
                })
                .collect()
        };
        pop.push(g);
    }
    let mut fit: Vec<f64> = pop.iter().map(|g| vm_objective(p, lay, g, &mut w)).collect();
    let mut best_i = argmin(&fit);
    let mut best = (pop[best_i].clone(), fit[best_i]);
    let mut stale = 0usize;
    let mut_p = 2.0 / d as f64;
    for _ in 0..cfg.ga_generations {
        let mut order: Vec<usize> = (0..pop_n).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]));
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(pop_n);
        next.push(pop[order[0]].clone());
        next.push(pop[order[1]].clone());
        let tour = |rng: &mut crate::rng::SimRng| -> usize {
            let mut b = rng.random_range(0..pop_n);
            for _ in 0..2 {
                let c = rng.random_range(0..pop_n);
                if fit[c] < fit[b] {
                    b = c;
                }
            }
            b
        };
        while next.len() < pop_n {
            let a = &pop[tour(&mut rng)];
            let b = &pop[tour(&mut rng)];
            let child: Vec<f64> = (0..d)
                .map(|j| {
                    let t = -0.25 + 1.5 * rng.random::<f64>();
                    let mut v = a[j] + t * (b[j] - a[j]);
                    if rng.random::<f64>() < mut_p {
                        v += if j < lay.h { 0.1 } else { 0.3 } * gauss(&mut rng);
                    }
                    if j < lay.h {
                        v.abs()
                    } else {
                        v
                    }
                })
                .collect();
            next.push(child);
        }
        pop = next;
        fit = pop.iter().map(|g| vm_objective(p, lay, g, &mut w)).collect();
        best_i = argmin(&fit);
        if fit[best_i] < best.1 * (1.0 - 1e-9) {
            best = (pop[best_i].clone(), fit[best_i]);
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= cfg.ga_stagnation {
            for g in pop.iter_mut().skip(1) {
                *g = perturb(&mut rng, &best.0, 0.2, 0.3);
            }
            pop[0] = best.0.clone();
            fit = pop.iter().map(|g| vm_objective(p, lay, g, &mut w)).collect();
            stale = 0;
        }
    }
    best
}

fn argmin(v: &[f64]) -> usize {
    let mut b = 0;
    for i in 1..v.len() {
        if v[i] < v[b] {
            b = i;
        }
    }
    b
}

fn vm_polish(p: &Problem, lay: &VmLayout, x0: &[f64], cfg: &SynthConfig) -> (Vec<f64>, f64, bool) {
    let n = lay.n;
    let mut w = alloc::vec![C64::new(0.0, 0.0); n];
    let mut g = alloc::vec![C64::new(0.0, 0.0); n];
    let lcfg = LbfgsConfig {
        max_iter: cfg.lbfgs_max_iter,
        ftol: 1e-13,
        gtol: 1e-10,
        ..LbfgsConfig::default()
    };
    let r = lbfgs(
        |x, grad| {
            let rn = lay.weights(x, &mut w);
            if !(rn > 0.0) {
                grad.iter_mut().for_each(|v| *v = 0.0);
                return f64::INFINITY;
            }
            let f = p.eval(&w, Some(&mut g));
            let mut s = 0.0;
            for i in 0..n {
                s += (g[i] * w[i]).re;
            }
            for j in 0..lay.h {
                grad[j] = -lay.multiplicity(j) * x[j] / (rn * rn) * s;
            }
            for i in 0..n {
                let j = lay.mirror(i);
                grad[j] += (g[i] * math::cis(x[lay.h + i])).re / rn;
                grad[lay.h + i] = -(g[i] * w[i]).im;
            }
            f
        },
        x0,
        &lcfg,
    );
    (r.x, r.value, !r.converged)
}

/// Variable-modulus beam with magnitudes symmetric about the array centre,
/// found by a genetic search seeded with the CM solution for the same target.
pub fn synthesize_vm<F: Fn(f64) -> f64>(
    target: F,
    band: &AngularInterval,
    n_t: usize,
    cfg: &SynthConfig,
    seed: u64,
) -> Result<(Beamformer, SynthesisReport)> {
    let p = Problem::new(&target, band, n_t, cfg)?;
    let lay = VmLayout::new(n_t);
    let (theta, _, _) = cm_search(&p, cfg, seed);
    let mut start = alloc::vec![1.0; lay.h];
    start.extend_from_slice(&theta);
    let (mut x, mut f) = ga_search(&p, &lay, &start, cfg, seed);
    let mut warning = false;
    if cfg.vm_polish {
        let (xp, fp, warn) = vm_polish(&p, &lay, &x, cfg);
        if fp <= f {
            x = xp;
            f = fp;
            warning = warn;
        }
    }
    if !f.is_finite() {
        return Err(Error::Convergence {
            what: "VM synthesis",
            iterations: cfg.ga_generations,
            residual: f,
        });
    }
    let mut w = alloc::vec![C64::new(0.0, 0.0); n_t];
    lay.weights(&x, &mut w);
    // exact palindromic magnitudes: build from |m| and the phases directly
    let beam = Beamformer::normalized(w)?;
    let rep = p.report(beam.weights(), BeamKind::Vm, warning);
    Ok((beam, rep))
}
