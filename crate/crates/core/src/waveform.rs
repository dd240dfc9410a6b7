//! Reference-signal sequences, frame timing and sampled observations.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

use crate::array::{Beamformer, UlaConfig};
use crate::channel::{effective_channel, MultipathChannel};
use crate::error::{Error, Result};
use crate::rng::{complex_normal, SimRng};
use crate::{math, C64};

/// Family of unit-modulus symbols used for the reference signal.
///
/// The detector statistics depend on the sequence only through `‖s‖²`, so
/// the family is a matter of taste.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RsKind {
    /// Seeded pseudo-random QPSK symbols.
    #[default]
    Qpsk,
    /// Zadoff-Chu sequence with the given root, coprime to the length for
    /// ideal autocorrelation.
    ZadoffChu { root: u32 },
}

/// Known pilot of `N_s` samples with `‖s‖² = N_s · power`.
#[derive(Debug, Clone, PartialEq)]
pub struct RsSequence {
    samples: Vec<C64>,
    power: f64,
    energy: f64,
}

impl RsSequence {
    /// Wrap arbitrary nonzero samples; `power` is set to `‖s‖²/N_s`.
    pub fn from_samples(samples: Vec<C64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain("reference signal needs at least two samples"));
        }
        let energy: f64 = samples.iter().map(|x| x.norm_sqr()).sum();
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::Domain("reference signal must have finite nonzero energy"));
        }
        let power = energy / samples.len() as f64;
        Ok(Self {
            samples,
            power,
            energy,
        })
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    pub fn power(&self) -> f64 {
        self.power
    }
    /// `‖s‖²`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// The same sequence multiplied by a complex constant.
    pub fn scaled(&self, c: C64) -> Result<Self> {
        Self::from_samples(self.samples.iter().map(|&x| x * c).collect())
    }
}

/// Generate a reference signal with `‖s‖² = n_s · power`.
pub fn generate_rs(n_s: usize, power: f64, kind: RsKind, seed: u64) -> Result<RsSequence> {
    if n_s < 2 {
        return Err(Error::Domain("reference signal needs n_s >= 2"));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Domain("reference signal power must be positive"));
    }
    let amp = math::sqrt(power);
    let samples: Vec<C64> = match kind {
        RsKind::Qpsk => {
            let mut rng = SimRng::seed_from_u64(seed);
            let h = core::f64::consts::FRAC_1_SQRT_2 * amp;
            (0..n_s)
                .map(|_| {
                    let b: u32 = rng.random_range(0..4);
                    let re = if b & 1 == 0 { h } else { -h };
                    let im = if b & 2 == 0 { h } else { -h };
                    C64::new(re, im)
                })
                .collect()
        }
        RsKind::ZadoffChu { root } => {
            let n = n_s as u64;
            let cf = n % 2;
            (0..n)
                .map(|k| {
                    // phase = -pi * root * k (k + cf) / n, reduced exactly in integers
                    let num = (root as u64 % (2 * n)) * ((k * (k + cf)) % (2 * n)) % (2 * n);
                    math::cis(-core::f64::consts::PI * num as f64 / n as f64) * amp
                })
                .collect()
        }
    };
    // make the energy exact to the last bit where rounding allows
    let e: f64 = samples.iter().map(|x| x.norm_sqr()).sum();
    let target = n_s as f64 * power;
    let fix = math::sqrt(target / e);
    let samples: Vec<C64> = samples.into_iter().map(|x| x * fix).collect();
    Ok(RsSequence {
        samples,
        power,
        energy: target,
    })
}

/// Slot timing in samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    pub t_slot: f64,
    pub t_rs: f64,
    pub sample_rate: f64,
    pub n_slot: usize,
    pub n_s: usize,
}

impl FrameConfig {
    /// Frame from durations in seconds and a sample rate in Hz.
    pub fn from_seconds(t_slot: f64, t_rs: f64, sample_rate: f64) -> Result<Self> {
        if !(t_slot > 0.0 && t_rs > 0.0 && sample_rate > 0.0) {
            return Err(Error::Domain("frame durations and rate must be positive"));
        }
        if t_rs >= t_slot {
            return Err(Error::Domain("RS duration must be shorter than the slot"));
        }
        let n_slot = math::round(t_slot * sample_rate) as usize;
        let n_s = math::round(t_rs * sample_rate) as usize;
        Self::check(n_slot, n_s)?;
        Ok(Self {
            t_slot,
            t_rs,
            sample_rate,
            n_slot,
            n_s,
        })
    }

    /// Frame from sample counts at unit sample rate.
    pub fn from_samples(n_slot: usize, n_s: usize) -> Result<Self> {
        Self::check(n_slot, n_s)?;
        if n_s >= n_slot {
            return Err(Error::Domain("RS duration must be shorter than the slot"));
        }
        Ok(Self {
            t_slot: n_slot as f64,
            t_rs: n_s as f64,
            sample_rate: 1.0,
            n_slot,
            n_s,
        })
    }

    fn check(n_slot: usize, n_s: usize) -> Result<()> {
        if n_s < 2 {
            return Err(Error::Domain("frame must hold at least two RS samples"));
        }
        if n_s > n_slot {
            return Err(Error::Domain("RS longer than a slot"));
        }
        Ok(())
    }

    /// Samples a UE must buffer to test every lag over `l_slots` slots.
    pub fn samples_needed(&self, l_slots: usize) -> usize {
        (l_slots + 1) * self.n_slot
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: alloc::vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                what: "matrix data length",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[C64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn row_mut(&mut self, r: usize) -> &mut [C64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    /// Squared Frobenius norm.
    pub fn frob_sqr(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Add the rank-one term `h sᵀ`.
    pub fn add_outer(&mut self, h: &[C64], s: &[C64]) {
        for (r, &hr) in h.iter().enumerate() {
            for (y, &sc) in self.row_mut(r).iter_mut().zip(s) {
                *y += hr * sc;
            }
        }
    }

    pub fn scale(&mut self, c: C64) {
        self.data.iter_mut().for_each(|x| *x *= c);
    }
}

/// Received blocks `Y_1 … Y_L` of shape `N_R × N_s` at one candidate lag.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationWindow {
    pub blocks: Vec<CMatrix>,
    /// Noise variance used by the generator; detectors must not read it.
    pub noise_variance: f64,
}

impl ObservationWindow {
    pub fn new(blocks: Vec<CMatrix>, noise_variance: f64) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or(Error::Domain("observation window needs at least one block"))?;
        let (r, c) = (first.rows(), first.cols());
        if r == 0 || c == 0 {
            return Err(Error::Domain("observation blocks must be nonempty"));
        }
        for b in &blocks {
            if b.rows() != r || b.cols() != c {
                return Err(Error::Shape {
                    what: "observation block shape",
                    expected: r * c,
                    found: b.rows() * b.cols(),
                });
            }
        }
        Ok(Self {
            blocks,
            noise_variance,
        })
    }

    pub fn l(&self) -> usize {
        self.blocks.len()
    }
    pub fn n_r(&self) -> usize {
        self.blocks[0].rows()
    }
    pub fn n_s(&self) -> usize {
        self.blocks[0].cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// No BS at the tested lag: noise only.
    H0,
    /// BS reference signal present at the tested lag.
    H1,
}

/// Observation blocks `Y_l = h_l sᵀ + Z_l` (H1) or `Z_l` (H0) for given
/// effective channels.
///
/// Noise is drawn before the signal is added, so under H1 subtracting
/// `h_l sᵀ` from block `l` returns exactly the noise an H0 draw from the same
/// RNG state would have produced.
pub fn observe_effective<R: Rng + ?Sized>(
    rng: &mut R,
    h: &[Vec<C64>],
    rs: &RsSequence,
    sigma2: f64,
    hypothesis: Hypothesis,
) -> Result<ObservationWindow> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Domain("noise variance must be positive"));
    }
    let n_r = h
        .first()
        .ok_or(Error::Domain("observation window needs at least one slot"))?
        .len();
    let n_s = rs.len();
    let mut blocks = Vec::with_capacity(h.len());
    for hl in h {
        if hl.len() != n_r {
            return Err(Error::Shape {
                what: "effective channel length",
                expected: n_r,
                found: hl.len(),
            });
        }
        let mut y = CMatrix::zeros(n_r, n_s);
        y.data_mut()
            .iter_mut()
            .for_each(|z| *z = complex_normal(rng, sigma2));
        if hypothesis == Hypothesis::H1 {
            y.add_outer(hl, rs.samples());
        }
        blocks.push(y);
    }
    ObservationWindow::new(blocks, sigma2)
}

/// Observation blocks for per-slot channels and per-slot transmit beams.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_observation<R: Rng + ?Sized>(
    rng: &mut R,
    channels: &[MultipathChannel],
    beams: &[Beamformer],
    rx: &UlaConfig,
    tx: &UlaConfig,
    rs: &RsSequence,
    sigma2: f64,
    hypothesis: Hypothesis,
) -> Result<ObservationWindow> {
    if channels.len() != beams.len() {
        return Err(Error::Shape {
            what: "per-slot beams vs channels",
            expected: channels.len(),
            found: beams.len(),
        });
    }
    let h = channels
        .iter()
        .zip(beams)
        .map(|(c, w)| effective_channel(c, w, rx, tx))
        .collect::<Result<Vec<_>>>()?;
    observe_effective(rng, &h, rs, sigma2, hypothesis)
}

/// Continuous received stream of `(l_slots + 1)·N_slot` samples per receive
/// antenna, with the RS of slot `l` starting at sample `l·N_slot + tau0`.
///
/// Passing an empty `h` produces noise only.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_stream<R: Rng + ?Sized>(
    rng: &mut R,
    h: &[Vec<C64>],
    n_r: usize,
    rs: &RsSequence,
    frame: &FrameConfig,
    tau0: usize,
    l_slots: usize,
    sigma2: f64,
) -> Result<CMatrix> {
    if sigma2 < 0.0 || !sigma2.is_finite() {
        return Err(Error::Domain("noise variance must be nonnegative"));
    }
    if tau0 >= frame.n_slot {
        return Err(Error::Domain("RS lag must lie in [0, N_slot)"));
    }
    if !h.is_empty() && h.len() != l_slots {
        return Err(Error::Shape {
            what: "per-slot channels vs slot count",
            expected: l_slots,
            found: h.len(),
        });
    }
    let total = frame.samples_needed(l_slots);
    let mut y = CMatrix::zeros(n_r, total);
    if sigma2 > 0.0 {
        y.data_mut()
            .iter_mut()
            .for_each(|z| *z = complex_normal(rng, sigma2));
    }
    for (l, hl) in h.iter().enumerate() {
        if hl.len() != n_r {
            return Err(Error::Shape {
                what: "effective channel length",
                expected: n_r,
                found: hl.len(),
            });
        }
        let start = l * frame.n_slot + tau0;
        for (r, &hr) in hl.iter().enumerate() {
            let row = &mut y.row_mut(r)[start..start + rs.len()];
            for (yv, &sv) in row.iter_mut().zip(rs.samples()) {
                *yv += hr * sv;
            }
        }
    }
    Ok(y)
}
