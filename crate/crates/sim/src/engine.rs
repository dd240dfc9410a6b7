//! One Monte Carlo trial: draw a direction, a channel window and the
//! transmit beams, then decide whether the UE misses the BS.

use std::f64::consts::FRAC_PI_2;

use mmwave_discovery::array::{Beamformer, UlaConfig};
use mmwave_discovery::beam::{Codebook, PathlossProfile};
use mmwave_discovery::channel::{effective_channel, ChannelLaw};
use mmwave_discovery::glrt::{argmax_lag, detect_sweep, glrt_statistic};
use mmwave_discovery::ncf::{miss_prob, LinkDims};
use mmwave_discovery::rng::{complex_normal, SimRng};
use mmwave_discovery::sector::AngularInterval;
use mmwave_discovery::waveform::{
    generate_rs, observe_effective, synthesize_stream, FrameConfig, Hypothesis, RsKind, RsSequence,
};
use mmwave_discovery::C64;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::design::{build_codebook, DesignedCodebook};
use crate::error::{Result, SimError};
use crate::scenario::{Condition, EngineKind, Scenario};

/// Label mixed into the master seed for the reference signal.
const RS_LABEL: u64 = 0x5253;

/// Transmit side of a trial.
#[derive(Debug, Clone)]
pub enum TxBeams {
    /// Beams cycled by the codebook schedule from a random start slot.
    Fixed {
        codebook: Codebook,
        schedule: Vec<usize>,
    },
    /// A fresh isotropic unit-norm beam in every slot.
    Random { n_t: usize },
}

impl TxBeams {
    pub fn fixed(codebook: Codebook) -> Self {
        let schedule = codebook.schedule();
        TxBeams::Fixed { codebook, schedule }
    }

    /// Slot-averaged gain toward `phi`; a random beam has unit mean gain in
    /// every direction.
    pub fn avg_gain(&self, phi: f64) -> f64 {
        match self {
            TxBeams::Fixed { codebook, .. } => codebook.avg_gain_u(phi.sin()),
            TxBeams::Random { .. } => 1.0,
        }
    }
}

/// Everything a sweep needs, resolved and validated up front.
#[derive(Debug, Clone)]
pub struct Setup {
    pub scenario: Scenario,
    pub frame: FrameConfig,
    pub rx: UlaConfig,
    pub tx: UlaConfig,
    pub sector: AngularInterval,
    pub profile: PathlossProfile,
    pub beams: TxBeams,
    pub rs: RsSequence,
    pub conditions: Vec<Condition>,
    /// Row label when the scenario has no SNR list.
    pub codebook_label: String,
}

impl Setup {
    /// Validate the scenario and design its codebook (or take `codebook`
    /// when one is supplied).
    pub fn new(scenario: Scenario, codebook: Option<DesignedCodebook>) -> Result<Self> {
        scenario.validate()?;
        let frame = scenario.frame()?;
        let rx = UlaConfig::new(scenario.arrays.n_r)?;
        let tx = UlaConfig::new(scenario.arrays.n_t)?;
        let sector = scenario.sector()?;
        let profile = scenario.profile()?;
        let ch = &scenario.channel;
        if !ch.random_direction {
            let phi = ch.dominant_aod_deg.to_radians();
            if profile.alpha_at(phi).is_none() {
                return Err(SimError::config("channel.dominant_aod_deg lies outside the sector"));
            }
        }
        let from_file = codebook.is_some();
        let designed = match codebook {
            Some(cb) => {
                if cb.codebook.n_t() != scenario.arrays.n_t {
                    return Err(SimError::config(format!(
                        "codebook has n_t = {} but the scenario has {}",
                        cb.codebook.n_t(),
                        scenario.arrays.n_t
                    )));
                }
                Some(cb)
            }
            None => build_codebook(&scenario)?,
        };
        let (beams, codebook_label) = match designed {
            Some(d) => {
                let label = if from_file {
                    d.label()
                } else {
                    scenario.codebook.label()
                };
                (TxBeams::fixed(d.codebook), label)
            }
            None => (
                TxBeams::Random {
                    n_t: scenario.arrays.n_t,
                },
                scenario.codebook.label(),
            ),
        };
        let rs = generate_rs(
            frame.n_s,
            scenario.link.p_t,
            RsKind::Qpsk,
            mmwave_discovery::rng::derive_key(scenario.seed, RS_LABEL),
        )?;
        let mut conditions = scenario.conditions()?;
        if scenario.channel.snr_db.is_none() {
            conditions[0].label = codebook_label.clone();
        }
        Ok(Self {
            scenario,
            frame,
            rx,
            tx,
            sector,
            profile,
            beams,
            rs,
            conditions,
            codebook_label,
        })
    }

    /// Dims of the detection problem over `l` slots.
    pub fn dims(&self, l: usize) -> Result<LinkDims> {
        Ok(LinkDims::new(self.rx.n_elements(), l, self.frame.n_s)?)
    }

    fn alpha(&self, phi: f64) -> f64 {
        // directions come from the sector, where the profile is defined
        self.profile.alpha_at(phi).unwrap_or(f64::INFINITY)
    }

    /// Dominant departure direction of a trial.
    fn draw_direction(&self, rng: &mut SimRng) -> f64 {
        let ch = &self.scenario.channel;
        if ch.random_direction {
            let s = &self.sector;
            (s.lo + rng.random::<f64>() * s.width()).clamp(-FRAC_PI_2, FRAC_PI_2)
        } else {
            ch.dominant_aod_deg.to_radians()
        }
    }

    /// Per-slot effective channels `√c_m H_l w_l` of one trial.
    ///
    /// The draw order (direction, start slot, channel window, then random
    /// beams) keeps the channel identical across codebooks for the same
    /// trial stream.
    pub fn slot_channels(&self, rng: &mut SimRng, l: usize) -> Result<Vec<Vec<C64>>> {
        let phi = self.draw_direction(rng);
        let start: u64 = rng.random();
        let ch = &self.scenario.channel;
        let law = ChannelLaw::new(ch.q_paths, ch.dominant_ratio_db, self.alpha(phi), phi, self.sector)?;
        let window = law.sample_window(rng, l);
        let mut out = Vec::with_capacity(l);
        match &self.beams {
            TxBeams::Fixed { codebook, schedule } => {
                let j = schedule.len() as u64;
                for (i, c) in window.iter().enumerate() {
                    let m = schedule[((start % j) as usize + i) % schedule.len()];
                    let mut h = effective_channel(c, &codebook.beams()[m], &self.rx, &self.tx)?;
                    let frac = codebook.power_fraction()[m];
                    if frac != 1.0 {
                        let s = frac.sqrt();
                        h.iter_mut().for_each(|x| *x *= s);
                    }
                    out.push(h);
                }
            }
            TxBeams::Random { n_t } => {
                for c in &window {
                    let w = Beamformer::normalized((0..*n_t).map(|_| complex_normal(rng, 1.0)).collect())?;
                    out.push(effective_channel(c, &w, &self.rx, &self.tx)?);
                }
            }
        }
        Ok(out)
    }
}

/// Per-point constants shared by every trial at one (L, condition).
pub struct Point<'a> {
    pub setup: &'a Setup,
    pub l: usize,
    pub gamma: f64,
    pub sigma2: f64,
    pub dims: LinkDims,
    signal_chi2: ChiSquared<f64>,
    noise_chi2: ChiSquared<f64>,
}

impl<'a> Point<'a> {
    pub fn new(setup: &'a Setup, l: usize, gamma: f64, sigma2: f64) -> Result<Self> {
        let dims = setup.dims(l)?;
        let chi = |k: f64| {
            ChiSquared::new(k).map_err(|_| SimError::config("degrees of freedom must be positive"))
        };
        Ok(Self {
            setup,
            l,
            gamma,
            sigma2,
            dims,
            signal_chi2: chi(dims.n1() - 1.0)?,
            noise_chi2: chi(dims.n2())?,
        })
    }

    /// Miss outcome of one trial: an indicator for the sampling engines, the
    /// exact conditional probability for the conditional engine.
    pub fn trial(&self, rng: &mut SimRng) -> Result<f64> {
        let s = self.setup;
        let h = s.slot_channels(rng, self.l)?;
        let energy: f64 = h.iter().flatten().map(|x| x.norm_sqr()).sum();
        let lambda = 2.0 * s.rs.energy() * energy / self.sigma2;
        let miss = match s.scenario.engine {
            EngineKind::Conditional => return Ok(miss_prob(self.gamma, &self.dims, lambda)?),
            EngineKind::Statistic => {
                // noncentral chi-square as (Z + √λ)² plus a central remainder
                let z: f64 = rng.sample(StandardNormal);
                let u = (z + lambda.sqrt()).powi(2) + self.signal_chi2.sample(rng);
                let v = self.noise_chi2.sample(rng);
                u / v <= self.gamma
            }
            EngineKind::Waveform if s.scenario.acquisition => {
                let tau0 = rng.random_range(0..s.frame.n_slot);
                let stream =
                    synthesize_stream(rng, &h, s.rx.n_elements(), &s.rs, &s.frame, tau0, self.l, self.sigma2)?;
                let d = detect_sweep(&stream, &s.rs, self.gamma, &s.frame, self.l)?;
                !(d[tau0].detected && argmax_lag(&d) == Some(tau0))
            }
            EngineKind::Waveform => {
                let y = observe_effective(rng, &h, &s.rs, self.sigma2, Hypothesis::H1)?;
                glrt_statistic(&y, &s.rs)?.statistic <= self.gamma
            }
        };
        Ok(if miss { 1.0 } else { 0.0 })
    }
}
