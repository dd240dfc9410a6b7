//! Codebooks: beams, slot counts and the transmit schedule.

use alloc::vec::Vec;

use rand::Rng;

use crate::array::{Beamformer, UlaConfig};
use crate::error::{Error, Result};
use crate::rng::complex_normal;
use crate::{math, C64};

/// `M` unit-norm beams with per-beam slot counts `J_m` and realized power
/// fractions (1 unless a per-antenna constraint scaled a beam down).
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    beams: Vec<Beamformer>,
    slots: Vec<usize>,
    power_fraction: Vec<f64>,
}

impl Codebook {
    pub fn new(beams: Vec<Beamformer>, slots: Vec<usize>) -> Result<Self> {
        if beams.is_empty() {
            return Err(Error::Domain("codebook needs at least one beam"));
        }
        if beams.len() != slots.len() {
            return Err(Error::Shape {
                what: "codebook slot counts vs beams",
                expected: beams.len(),
                found: slots.len(),
            });
        }
        if slots.contains(&0) {
            return Err(Error::Domain("every beam needs at least one slot"));
        }
        let n = beams[0].len();
        if let Some(b) = beams.iter().find(|b| b.len() != n) {
            return Err(Error::Shape {
                what: "codebook beam lengths",
                expected: n,
                found: b.len(),
            });
        }
        let power_fraction = alloc::vec![1.0; beams.len()];
        Ok(Self {
            beams,
            slots,
            power_fraction,
        })
    }

    /// Single omnidirectional beam (`[1, 0, …, 0]`).
    pub fn omni(n_t: usize) -> Result<Self> {
        Self::new(alloc::vec![Beamformer::omni(n_t)?], alloc::vec![1])
    }

    pub fn beams(&self) -> &[Beamformer] {
        &self.beams
    }
    pub fn slots(&self) -> &[usize] {
        &self.slots
    }
    pub fn power_fraction(&self) -> &[f64] {
        &self.power_fraction
    }
    pub fn n_t(&self) -> usize {
        self.beams[0].len()
    }
    pub fn len(&self) -> usize {
        self.beams.len()
    }
    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    /// Period `J = Σ_m J_m`.
    pub fn period(&self) -> usize {
        self.slots.iter().sum()
    }

    /// Same beams with different slot counts.
    pub fn with_slots(&self, slots: Vec<usize>) -> Result<Self> {
        let mut c = Self::new(self.beams.clone(), slots)?;
        c.power_fraction = self.power_fraction.clone();
        Ok(c)
    }

    /// Apply a per-antenna power limit `β` to every beam.
    pub fn with_power_constraint(&self, beta: f64) -> Result<Self> {
        let mut c = self.clone();
        for (i, b) in self.beams.iter().enumerate() {
            c.power_fraction[i] = apply_power_constraint(b, beta)?.power_fraction;
        }
        Ok(c)
    }

    /// Beam index per slot over one period.
    ///
    /// Slots are interleaved by smooth weighted round robin, so beams with
    /// equal counts simply alternate (`0, 1, 2, 3, 0, 1, …`).
    pub fn schedule(&self) -> Vec<usize> {
        let j = self.period() as i64;
        let mut credit = alloc::vec![0i64; self.len()];
        let mut out = Vec::with_capacity(j as usize);
        for _ in 0..j {
            for (c, &s) in credit.iter_mut().zip(&self.slots) {
                *c += s as i64;
            }
            let mut best = 0;
            for i in 1..credit.len() {
                if credit[i] > credit[best] {
                    best = i;
                }
            }
            credit[best] -= j;
            out.push(best);
        }
        out
    }

    /// Beam used in slot `l` (periodic schedule).
    pub fn beam_index_for_slot(&self, schedule: &[usize], l: usize) -> usize {
        schedule[l % schedule.len()]
    }

    /// Average gain `(1/J) Σ_m J_m c_m G_m` at direction cosine `u`, with
    /// `c_m` the realized power fraction.
    pub fn avg_gain_u(&self, u: f64) -> f64 {
        let j = self.period() as f64;
        self.beams
            .iter()
            .zip(&self.slots)
            .zip(&self.power_fraction)
            .map(|((b, &s), &c)| s as f64 * c * b.gain_u(u))
            .sum::<f64>()
            / j
    }
}

/// Average codebook gain toward `angle`.
pub fn avg_codebook_gain(codebook: &Codebook, angle: f64) -> Result<f64> {
    if !(-core::f64::consts::FRAC_PI_2..=core::f64::consts::FRAC_PI_2).contains(&angle) {
        return Err(Error::Domain("direction outside [-pi/2, pi/2]"));
    }
    Ok(codebook.avg_gain_u(math::sin(angle)))
}

/// `j_total` independent isotropic unit-norm beams, one slot each.
pub fn random_codebook<R: Rng + ?Sized>(rng: &mut R, n_t: usize, j_total: usize) -> Result<Codebook> {
    if n_t == 0 || j_total == 0 {
        return Err(Error::Domain("random codebook needs n_t >= 1 and j >= 1"));
    }
    let beams = (0..j_total)
        .map(|_| Beamformer::normalized((0..n_t).map(|_| complex_normal(rng, 1.0)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Codebook::new(beams, alloc::vec![1; j_total])
}

/// Beam scaled to meet a per-antenna power limit.
#[derive(Debug, Clone, PartialEq)]
pub struct PoweredBeam {
    pub weights: Vec<C64>,
    /// `‖w_scaled‖²`.
    pub power_fraction: f64,
}

/// Uniformly scale `w` so that `max_n |w_n|² ≤ β`.
///
/// Constant-modulus beams have `|w_n|² = 1/N_T` and pass unchanged for every
/// admissible `β`; the small tolerance absorbs rounding in that case.
pub fn apply_power_constraint(w: &Beamformer, beta: f64) -> Result<PoweredBeam> {
    let n_t = w.len() as f64;
    if !(beta <= 1.0) {
        return Err(Error::Domain("per-antenna power fraction must not exceed 1"));
    }
    if !(beta * n_t >= 1.0 - 1e-12) {
        return Err(Error::Infeasible("per-antenna limit below 1/N_T cannot carry full power"));
    }
    let peak = w.peak_element_power();
    if peak <= beta * (1.0 + 1e-12) {
        return Ok(PoweredBeam {
            weights: w.weights().to_vec(),
            power_fraction: 1.0,
        });
    }
    let frac = beta / peak;
    let c = math::sqrt(frac);
    Ok(PoweredBeam {
        weights: w.weights().iter().map(|&x| x * c).collect(),
        power_fraction: frac,
    })
}

/// Omni codebook helper for arrays.
pub fn omni_for(tx: &UlaConfig) -> Result<Codebook> {
    Codebook::omni(tx.n_elements())
}
