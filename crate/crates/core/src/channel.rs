//! Sparse multipath channels between an N_T-element BS array and an
//! N_R-element UE array.

use alloc::vec::Vec;

use rand::Rng;

use crate::array::{phases_into, Beamformer, UlaConfig};
use crate::error::{Error, Result};
use crate::rng::complex_normal;
use crate::sector::AngularInterval;
use crate::{math, C64};

/// One propagation path: complex gain, UE-side arrival and BS-side departure
/// directions (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain: C64,
    pub aoa: f64,
    pub aod: f64,
}

/// A channel realization `H = Σ_q g_q u(φ_q)^† v(ψ_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    pub paths: Vec<PathComponent>,
    /// Whether the scattered paths of this realization were redrawn for the
    /// slot (as opposed to being shared by the whole window).
    pub scatter_redrawn: bool,
}

impl MultipathChannel {
    /// A single path.
    pub fn single(gain: C64, aoa: f64, aod: f64) -> Self {
        Self {
            paths: alloc::vec![PathComponent { gain, aoa, aod }],
            scatter_redrawn: false,
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }
}

/// Statistical law of a channel: one dominant path of fixed magnitude plus
/// `q_paths − 1` Rayleigh scattered paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelLaw {
    pub q_paths: usize,
    /// Power ratio in dB between the dominant path and all scattered paths
    /// together. `None` makes every path (including the dominant one)
    /// Rayleigh with equal mean power.
    pub dominant_ratio_db: Option<f64>,
    /// Expected total path energy `Σ_q E|g_q|²`, i.e. `1/α`.
    pub total_energy: f64,
    pub dominant_aod: f64,
    pub dominant_aoa: f64,
    /// BS-side departure directions of scattered paths.
    pub scatter_aod: AngularInterval,
    /// UE-side arrival directions of scattered paths.
    pub scatter_aoa: AngularInterval,
    pub redraw_scatter_per_slot: bool,
}

impl ChannelLaw {
    /// Dominant-plus-scatter law with pathloss `alpha`; scattered departures
    /// span `sector` and scattered arrivals span the whole visible range.
    pub fn new(
        q_paths: usize,
        dominant_ratio_db: Option<f64>,
        alpha: f64,
        dominant_aod: f64,
        sector: AngularInterval,
    ) -> Result<Self> {
        let law = Self {
            q_paths,
            dominant_ratio_db,
            total_energy: 1.0 / alpha,
            dominant_aod,
            dominant_aoa: 0.0,
            scatter_aod: sector,
            scatter_aoa: AngularInterval::full(),
            redraw_scatter_per_slot: true,
        };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_paths == 0 {
            return Err(Error::Domain("channel needs at least one path"));
        }
        if !(self.total_energy > 0.0 && self.total_energy.is_finite()) {
            return Err(Error::Domain("pathloss must be positive and finite"));
        }
        for a in [self.dominant_aod, self.dominant_aoa] {
            if !(-core::f64::consts::FRAC_PI_2..=core::f64::consts::FRAC_PI_2).contains(&a) {
                return Err(Error::Domain("dominant direction outside [-pi/2, pi/2]"));
            }
        }
        Ok(())
    }

    /// `(E|g_1|², E|g_q|²)` for the dominant and each scattered path.
    pub fn path_energies(&self) -> (f64, f64) {
        let e = self.total_energy;
        match self.dominant_ratio_db {
            None => (e / self.q_paths as f64, e / self.q_paths as f64),
            Some(_) if self.q_paths == 1 => (e, 0.0),
            Some(db) => {
                let r = math::powf(10.0, db / 10.0);
                let scatter = e / (1.0 + r);
                (e - scatter, scatter / (self.q_paths - 1) as f64)
            }
        }
    }

    fn dominant_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> C64 {
        let (e_dom, _) = self.path_energies();
        match self.dominant_ratio_db {
            None => complex_normal(rng, e_dom),
            Some(_) => {
                let ph: f64 = rng.random::<f64>() * core::f64::consts::TAU;
                math::cis(ph) * math::sqrt(e_dom)
            }
        }
    }

    fn push_scatter<R: Rng + ?Sized>(&self, rng: &mut R, paths: &mut Vec<PathComponent>) {
        let (_, e_sc) = self.path_energies();
        for _ in 1..self.q_paths {
            let gain = complex_normal(rng, e_sc);
            let aoa = uniform_in(rng, &self.scatter_aoa);
            let aod = uniform_in(rng, &self.scatter_aod);
            paths.push(PathComponent { gain, aoa, aod });
        }
    }

    /// One independent realization.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MultipathChannel {
        let mut paths = Vec::with_capacity(self.q_paths);
        paths.push(PathComponent {
            gain: self.dominant_gain(rng),
            aoa: self.dominant_aoa,
            aod: self.dominant_aod,
        });
        self.push_scatter(rng, &mut paths);
        MultipathChannel {
            paths,
            scatter_redrawn: self.redraw_scatter_per_slot,
        }
    }

    /// Realizations for `l` consecutive slots: the dominant path is drawn once
    /// and kept, scattered paths are redrawn per slot when the law says so.
    pub fn sample_window<R: Rng + ?Sized>(&self, rng: &mut R, l: usize) -> Vec<MultipathChannel> {
        let first = self.sample(rng);
        let mut out = Vec::with_capacity(l);
        for i in 0..l {
            if i == 0 || !self.redraw_scatter_per_slot {
                out.push(first.clone());
                continue;
            }
            let mut paths = Vec::with_capacity(self.q_paths);
            paths.push(first.paths[0]);
            self.push_scatter(rng, &mut paths);
            out.push(MultipathChannel {
                paths,
                scatter_redrawn: true,
            });
        }
        out
    }
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, iv: &AngularInterval) -> f64 {
    iv.lo + rng.random::<f64>() * iv.width()
}

/// Effective channel after transmit beamforming, `h = H w`.
pub fn effective_channel(
    channel: &MultipathChannel,
    w: &Beamformer,
    rx: &UlaConfig,
    tx: &UlaConfig,
) -> Result<Vec<C64>> {
    if w.len() != tx.n_elements() {
        return Err(Error::Shape {
            what: "beamformer length vs transmit array",
            expected: tx.n_elements(),
            found: w.len(),
        });
    }
    let mut h = alloc::vec![C64::new(0.0, 0.0); rx.n_elements()];
    let mut ph = Vec::with_capacity(w.len().max(rx.n_elements()));
    for p in &channel.paths {
        phases_into(math::sin(p.aod), w.len(), &mut ph);
        let af: C64 = w.weights().iter().zip(&ph).map(|(&wk, &e)| wk * e).sum();
        let coef = p.gain * af;
        phases_into(math::sin(p.aoa), rx.n_elements(), &mut ph);
        for (hk, e) in h.iter_mut().zip(&ph) {
            *hk += coef * e.conj();
        }
    }
    Ok(h)
}
